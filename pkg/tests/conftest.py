# tests/conftest.py

import numpy as np
import pytest

from sdk.core.models import ContextQuery, ScenarioSet
from tests.helpers import objective_problem, running_problem, running_problem_dict, write


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: randomized harnesses and multi-period runs")


@pytest.fixture
def running():
    """
    The two-scenario instance {(x, h)} = {(0, 0), (1, 10)} with recourse
    u₁ − u₂ = h − z, cost u₁, and first stage 0 ≤ z ≤ 10 at unit cost.
    """
    return running_problem()


@pytest.fixture
def objective():
    return objective_problem()


@pytest.fixture
def segment():
    """1-D covariates {0, 1} paired with y ∈ {0, 10}."""
    return ScenarioSet(x=[[0.0], [1.0]], h=[[0.0], [10.0]])


@pytest.fixture
def query():
    """Factory for ContextQuery with an explicit Γ."""

    def make(x, gamma=None, norm="inf", delta=None):
        return ContextQuery(x=np.atleast_1d(np.asarray(x, dtype=float)), gamma=gamma, norm=norm, delta=delta)

    return make


@pytest.fixture
def problem_file(tmp_path):
    """Running instance written as a problem JSON file."""
    return write(tmp_path / "problem.json", running_problem_dict())


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
