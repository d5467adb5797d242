# tests/helpers.py
"""
Reference solvers and instance builders shared by the test suite.

The reference solvers are deliberately naive: vertex enumeration for small
LPs and a 1-D grid search for the running two-stage instance.
"""

import itertools
import json
from typing import Optional, Tuple

import numpy as np

from sdk.core.models import FirstStage, ScenarioSet, TwoStageProblem, UncertaintyKind
from sdk.energy.network import Generator, NetworkInstance, Renewable


def write(path, payload) -> str:
    path.write_text(json.dumps(payload))
    return str(path)


# -------------------------------------------------------------------
# VERTEX-ENUMERATION LP ORACLE
# -------------------------------------------------------------------

def enumerate_lp_vertices(c, A_in, b_in, tol: float = 1e-9) -> Tuple[Optional[float], Optional[np.ndarray]]:
    """
    min c·x over the bounded polytope {A_in x ≤ b_in} by trying every n-subset of
    rows as active set. Returns (None, None) when no vertex is feasible.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_in, dtype=float)
    b = np.asarray(b_in, dtype=float)
    n = c.size
    best, best_x = None, None
    for rows in itertools.combinations(range(A.shape[0]), n):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ x <= b + tol * (1.0 + np.abs(b))):
            value = float(c @ x)
            if best is None or value < best:
                best, best_x = value, x
    return best, best_x


def random_box_lp(rng, n: int, m: int, box: float = 10.0):
    """
    Random feasible LP min c·x s.t. A x ≤ b, 0 ≤ x ≤ box, with an interior point.

    Returns (c, A, b, stacked rows for enumeration, stacked rhs).
    """
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.5, box - 0.5, size=n)
    b = A @ x0 + rng.uniform(0.1, 2.0, size=m)
    c = rng.normal(size=n)
    rows = np.vstack([A, -np.eye(n), np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n), np.full(n, box)])
    return c, A, b, rows, rhs


# -------------------------------------------------------------------
# RUNNING TWO-SCENARIO INSTANCE
# -------------------------------------------------------------------

def running_problem(z_ub: float = 10.0, c: float = 1.0) -> TwoStageProblem:
    """
    Scenarios (x, h) ∈ {(0, 0), (1, 10)}; recourse min u₁ s.t. u₁ − u₂ = h − z,
    so Q(z) = max(0, h̃ − z) for the worst admissible h̃.
    """
    return TwoStageProblem(
        c=[c],
        Z=FirstStage.box([0.0], [z_ub]),
        q=[1.0, 0.0],
        W=[[1.0, -1.0]],
        T=[[1.0]],
        scenarios=ScenarioSet(x=[[0.0], [1.0]], h=[[0.0], [10.0]]),
        uncertainty_kind=UncertaintyKind.RHS_H_ONLY,
    )


def running_problem_dict(z_ub: float = 10.0) -> dict:
    return {
        "c": [1.0],
        "Z": {"lb": [0.0], "ub": [z_ub]},
        "q": [1.0, 0.0],
        "W": [[1.0, -1.0]],
        "T": [[1.0]],
        "scenarios": {"x": [[0.0], [1.0]], "h": [[0.0], [10.0]]},
        "uncertainty_kind": "rhs_h_only",
    }


def worst_h(x: float, gamma: float) -> float:
    """Largest h̃ = 10·x̃ with x̃ ∈ [0, 1] and |x̃ − x| ≤ γ."""
    return 10.0 * min(1.0, x + gamma)


def grid_search_running(x: float, gamma: float, z_ub: float = 10.0, step: float = 1e-3) -> float:
    """min_z z + max(0, h̃ − z) on a grid over [0, z_ub]."""
    zs = np.arange(0.0, z_ub + step / 2, step)
    h = worst_h(x, gamma)
    return float(np.min(zs + np.maximum(0.0, h - zs)))


def objective_problem() -> TwoStageProblem:
    """q-scenarios {1, 3} paired with x ∈ {0, 1}; the single recourse row forces u = 4."""
    return TwoStageProblem(
        c=[0.0],
        Z=FirstStage.box([0.0], [1.0]),
        W=[[1.0]],
        h=[4.0],
        T=[[0.0]],
        scenarios=ScenarioSet(x=[[0.0], [1.0]], q=[[1.0], [3.0]]),
        uncertainty_kind=UncertaintyKind.OBJECTIVE_Q,
    )


# -------------------------------------------------------------------
# RANDOM COMPLETE-RECOURSE INSTANCES
# -------------------------------------------------------------------

def random_rhs_problem(
    rng, S: int = 3, d_x: int = 2, d_h: int = 2, d_z: int = 2, d_u: Optional[int] = None, uncertain_T: bool = False
) -> TwoStageProblem:
    """
    Complete recourse with positive q. With d_u unset W = [I, −I] and
    Π = {π : −q⁻ ≤ π ≤ q⁺} is a box; with d_u ≥ d_h + 1 W = [I | −1 | random]
    still spans every r with u ≥ 0, and Π stays bounded and contains 0.

    With uncertain_T each scenario also carries its own T_s.
    """
    if d_u is None:
        W = np.hstack([np.eye(d_h), -np.eye(d_h)])
    else:
        assert d_u >= d_h + 1, "need d_u ≥ d_h + 1 for complete recourse"
        W = np.hstack([np.eye(d_h), -np.ones((d_h, 1)), rng.uniform(-1.0, 1.0, size=(d_h, d_u - d_h - 1))])
    q = rng.uniform(0.5, 2.0, size=W.shape[1])
    x = rng.uniform(0.0, 1.0, size=(S, d_x))
    h = [rng.uniform(-3.0, 3.0, size=d_h) for _ in range(S)]
    common = dict(c=rng.uniform(0.1, 1.0, size=d_z), Z=FirstStage.box([0.0] * d_z, [5.0] * d_z), q=q, W=W)
    if uncertain_T:
        T = [rng.uniform(-1.0, 1.0, size=(d_h, d_z)) for _ in range(S)]
        return TwoStageProblem(
            **common,
            uncertainty_kind=UncertaintyKind.RHS_H_AND_T,
            scenarios=ScenarioSet(x=x, h=h, T=T),
        )
    return TwoStageProblem(
        **common,
        T=rng.uniform(-1.0, 1.0, size=(d_h, d_z)),
        scenarios=ScenarioSet(x=x, h=h),
    )


def random_rhs_T_problem(rng, **sizes) -> TwoStageProblem:
    """random_rhs_problem with scenario-dependent T_s."""
    return random_rhs_problem(rng, uncertain_T=True, **sizes)


# -------------------------------------------------------------------
# ENERGY
# -------------------------------------------------------------------

def single_bus(demand: float = 1000.0, expected: float = 100.0) -> NetworkInstance:
    """One bus, one generator, one renewable unit; no lines."""
    return NetworkInstance(
        buses=1,
        generators=[
            Generator(bus=0, p_max=2000.0, ramp_up=2000.0, ramp_dn=2000.0, cost=10.0, cost_up=1.0, cost_dn=1.0)
        ],
        renewables=[Renewable(bus=0)],
        demand=[[demand]],
        expected_output=[[expected]],
    )
