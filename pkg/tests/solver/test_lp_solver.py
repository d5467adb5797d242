# tests/solver/test_lp_solver.py

import numpy as np
import pytest

from sdk.core.exceptions import DimensionError
from sdk.solver.lp_solver import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from tests.helpers import enumerate_lp_vertices, random_box_lp

# -------------------------------------------------------------------
# TEST small cases
# -------------------------------------------------------------------

def test_single_lower_bound():
    """
    min x s.t. x ≥ 1 stops at x = 1.
    """
    sol = solve_lp(LinearProgram.build([1.0], lb=[1.0]))
    assert sol.status == OPTIMAL
    assert sol.primal[0] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(1.0)


def test_contradictory_bounds_give_certificate():
    """
    x ≤ −1 with x ≥ 0 is infeasible and comes with a Farkas vector.
    """
    sol = solve_lp(LinearProgram.build([0.0], A_in=[[1.0]], b_in=[-1.0]))
    assert sol.status == INFEASIBLE
    assert sol.farkas is not None


def test_simplex_corner_and_dual():
    """
    min −x−y s.t. x+y ≤ 1 has value −1 and row dual −1.
    """
    sol = solve_lp(LinearProgram.build([-1.0, -1.0], A_in=[[1.0, 1.0]], b_in=[1.0]))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-1.0)
    assert sol.dual_in[0] == pytest.approx(-1.0)
    assert sol.dual_objective == pytest.approx(-1.0)


def test_inequality_duals_nonpositive():
    """
    min −x s.t. x ≤ 2 and −x ≤ 1: the active row prices at −1, the slack row at 0.
    """
    sol = solve_lp(LinearProgram.build([-1.0], A_in=[[1.0], [-1.0]], b_in=[2.0, 1.0], lb=[-np.inf]))
    assert sol.status == OPTIMAL
    assert sol.dual_in[0] == pytest.approx(-1.0)
    assert sol.dual_in[1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(sol.dual_in <= 0.0)


def test_unbounded_ray():
    """
    min −x with x ≥ 0 and no rows is unbounded along +x.
    """
    sol = solve_lp(LinearProgram.build([-1.0]))
    assert sol.status == UNBOUNDED
    assert sol.ray is not None and sol.ray[0] > 0


def test_free_variable_with_equality():
    """
    Free variables are split internally: min x s.t. x − y = −3, y ∈ [0, 2], x free → x = −3.
    """
    sol = solve_lp(
        LinearProgram.build([1.0, 0.0], A_eq=[[1.0, -1.0]], b_eq=[-3.0], lb=[-np.inf, 0.0], ub=[np.inf, 2.0])
    )
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-3.0)


def test_redundant_equalities():
    """
    A duplicated equality row is dropped without changing the answer.
    """
    sol = solve_lp(LinearProgram.build([1.0, 2.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0]))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(1.0)
    assert sol.dual_eq.size == 2


def test_dimension_mismatch_rejected():
    with pytest.raises(DimensionError):
        LinearProgram.build([1.0, 1.0], A_in=[[1.0]], b_in=[1.0])


# -------------------------------------------------------------------
# TEST randomized agreement with vertex enumeration
# -------------------------------------------------------------------

def _check_kkt(lp: LinearProgram, sol) -> None:
    x = sol.primal
    assert np.all(lp.A_in @ x <= lp.b_in + 1e-7), "Primal feasibility"
    assert np.all(x >= lp.lb - 1e-7) and np.all(x <= lp.ub + 1e-7)
    assert abs(sol.objective - sol.dual_objective) <= 1e-6 * (1.0 + abs(sol.objective)), "Strong duality"
    slack = lp.b_in - lp.A_in @ x
    assert np.all(np.abs(slack * sol.dual_in) <= 1e-6), "Complementary slackness"
    assert np.all(sol.dual_in <= 0.0), "Inequality duals of a min problem are nonpositive"


@pytest.mark.parametrize("seed", range(40))
def test_matches_vertex_enumeration(seed):
    """
    Random bounded LPs (up to 4 variables, 4 rows) agree with brute-force vertex enumeration.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 5))
    c, A, b, rows, rhs = random_box_lp(rng, n, m)
    lp = LinearProgram.build(c, A_in=A, b_in=b, ub=np.full(n, 10.0))
    sol = solve_lp(lp)
    expected, _ = enumerate_lp_vertices(c, rows, rhs)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(expected, abs=1e-7 * (1.0 + abs(expected)))
    _check_kkt(lp, sol)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100, 260))
def test_matches_vertex_enumeration_larger(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    m = int(rng.integers(2, 7))
    c, A, b, rows, rhs = random_box_lp(rng, n, m)
    lp = LinearProgram.build(c, A_in=A, b_in=b, ub=np.full(n, 10.0))
    sol = solve_lp(lp)
    expected, _ = enumerate_lp_vertices(c, rows, rhs)
    assert sol.objective == pytest.approx(expected, abs=1e-7 * (1.0 + abs(expected)))
    _check_kkt(lp, sol)
