# tests/oracle/test_oracles.py

import numpy as np
import pytest

from sdk.core.exceptions import (
    DimensionError,
    EmptySetError,
    IncompleteRecourseError,
    InputError,
    UnboundedOracleError,
)
from sdk.core.models import ContextQuery, FirstStage, ScenarioSet, TwoStageProblem
from sdk.ddcu.uncertainty_set import contains, gamma0
from sdk.oracle import recourse
from sdk.oracle.bilevel import _d_bilevel_program, _solve_escalating, oracle_d_bilevel, oracle_p_bilevel, prepare_oracle
from sdk.oracle.bruteforce import oracle_bruteforce
from sdk.oracle.recourse import dual_polytope_bound, improving_ray, solve_recourse
from tests.helpers import random_rhs_problem, random_rhs_T_problem

ORACLES = [oracle_p_bilevel, oracle_d_bilevel, oracle_bruteforce]

# -------------------------------------------------------------------
# TEST running instance
# -------------------------------------------------------------------

@pytest.mark.parametrize("oracle", ORACLES, ids=["p", "d", "brute"])
@pytest.mark.parametrize(
    "z, gamma, expected",
    [
        (2.0, 0.0, 3.0),
        (2.0, 0.5, 8.0),
        (10.0, 0.5, 0.0),
    ],
)
def test_running_values(running, query, oracle, z, gamma, expected):
    """
    At x = 0.5 the worst admissible h̃ is 10·min(1, 0.5 + Γ), so Q(z) = max(0, h̃ − z).
    """
    res = oracle(running, [z], query(0.5, gamma=gamma))
    assert res.value == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("oracle", ORACLES, ids=["p", "d", "brute"])
def test_result_identities(running, query, oracle):
    """
    π lies in Π, θ is a probability vector and value = ρ + x·γ + Γ‖γ‖₁.
    """
    q = query(0.5, gamma=0.25)
    res = oracle(running, [2.0], q)
    assert np.all(running.W.T @ res.pi <= running.q + 1e-7), "π must be dual feasible"
    assert res.theta.min() >= -1e-9
    assert res.theta.sum() == pytest.approx(1.0)
    dual = res.rho + float(q.x @ res.gamma_vec) + res.gamma * np.abs(res.gamma_vec).sum()
    assert dual == pytest.approx(res.value, abs=1e-6)
    assert res.x_tilde[0] == pytest.approx(float(res.theta @ running.scenarios.x[:, 0]))
    assert abs(res.x_tilde[0] - 0.5) <= 0.25 + 1e-7, "Worst-case covariate stays in the ball"


def test_h_star_is_the_worst_case(running, query):
    res = oracle_d_bilevel(running, [2.0], query(0.5, gamma=0.25))
    assert res.h_star[0] == pytest.approx(7.5, abs=1e-6)
    assert res.value == pytest.approx(5.5, abs=1e-6)


def test_budget_below_gamma0(running, query):
    with pytest.raises(EmptySetError):
        oracle_d_bilevel(running, [2.0], query(1.5, gamma=0.1))


def _one_sided_problem() -> TwoStageProblem:
    """W = [1] with u ≥ 0 cannot absorb h − z < 0; Π = {π ≤ 1} has the ray d = −1."""
    return TwoStageProblem(
        c=[1.0],
        Z=FirstStage.box([0.0], [10.0]),
        q=[1.0],
        W=[[1.0]],
        T=[[1.0]],
        scenarios=ScenarioSet(x=[[0.0], [1.0]], h=[[0.0], [10.0]]),
    )


@pytest.mark.parametrize("oracle", ORACLES, ids=["p", "d", "brute"])
def test_unbounded_ray_reported(query, oracle):
    """
    At z = 5 scenario 0 has r = −5 and πr grows without bound along d = −1.
    """
    with pytest.raises(UnboundedOracleError) as err:
        oracle(_one_sided_problem(), [5.0], query(0.5, gamma=0.1))
    details = err.value.details
    assert details["scenario"] == 0
    assert details["theta"] == [1.0, 0.0]
    assert details["ray"][0] < 0.0


def test_improving_ray_found_only_when_it_helps():
    W = np.array([[1.0]])
    assert improving_ray(W, np.array([[3.0], [10.0]])) is None, "d = −1 does not improve r ≥ 0"
    s, d = improving_ray(W, np.array([[3.0], [-2.0]]))
    assert s == 1
    assert d[0] == pytest.approx(-1.0)


def test_improving_ray_none_for_bounded_dual():
    W = np.hstack([np.eye(2), -np.eye(2)])
    assert improving_ray(W, np.array([[1.0, -1.0], [-3.0, 2.0]])) is None


def test_incomplete_recourse_carries_theta():
    with pytest.raises(IncompleteRecourseError) as err:
        solve_recourse(np.array([[1.0]]), np.array([1.0]), np.array([-1.0]), theta=np.array([0.25, 0.75]))
    assert err.value.details["theta"] == [0.25, 0.75]
    assert err.value.code == "incomplete_recourse"


def test_objective_problem_rejected(objective, query):
    with pytest.raises(InputError):
        oracle_d_bilevel(objective, [0.0], query(0.5, gamma=0.1))


def test_bruteforce_size_limit(rng, query):
    p = random_rhs_problem(rng, S=9, d_x=2)
    with pytest.raises(DimensionError):
        oracle_bruteforce(p, [1.0, 1.0], query([0.5, 0.5], delta=0.5))


# -------------------------------------------------------------------
# TEST recourse helpers
# -------------------------------------------------------------------

def test_solve_recourse_dual_vertex():
    """
    min u₁ s.t. u₁ − u₂ = 3 has value 3 and dual π = 1.
    """
    out = solve_recourse(np.array([[1.0, -1.0]]), np.array([1.0, 0.0]), np.array([3.0]))
    assert out.value == pytest.approx(3.0)
    assert out.pi[0] == pytest.approx(1.0)


def test_dual_polytope_bound_box():
    W = np.hstack([np.eye(2), -np.eye(2)])
    q = np.array([1.0, 2.0, 3.0, 0.5])
    assert dual_polytope_bound(W, q) == pytest.approx(3.0)


def test_dual_polytope_bound_is_recomputed_per_call():
    """Same W with a different q gives the new bound; nothing is cached at module level."""
    W = np.hstack([np.eye(2), -np.eye(2)])
    assert dual_polytope_bound(W, np.array([1.0, 2.0, 3.0, 0.5])) == pytest.approx(3.0)
    assert dual_polytope_bound(W, np.array([1.0, 7.0, 3.0, 0.5])) == pytest.approx(7.0)
    assert not hasattr(recourse, "_BOUND_CACHE")


def test_dual_polytope_bound_infinite_on_ray():
    assert dual_polytope_bound(np.array([[1.0]]), np.array([1.0])) == float("inf")


# -------------------------------------------------------------------
# TEST big-M escalation
# -------------------------------------------------------------------

def test_value_mismatch_escalates_big_m(running, query):
    """
    A KKT point whose scenario weights disagree with the MILP value is treated
    as cut off by M: the next attempt doubles M and accepts the true weights.
    """
    data = prepare_oracle(running, [2.0], query(0.5, gamma=0.5))

    def build(factor):
        return _d_bilevel_program(data, factor)

    def true_theta(kkt, v):
        return kkt.split(v)[2][: data.S]

    _, res, baseline = _solve_escalating("d_bilevel", data, build, true_theta)
    assert res.objective == pytest.approx(8.0, abs=1e-6)

    calls = []

    def stale_first(kkt, v):
        calls.append(1)
        # scenario 0 alone has r = −2 and recourse value 0
        return np.array([1.0, 0.0]) if len(calls) == 1 else true_theta(kkt, v)

    _, res, attempts = _solve_escalating("d_bilevel", data, build, stale_first)
    assert attempts == baseline + 1, "the disagreeing point must trigger one doubling"
    assert res.objective == pytest.approx(8.0, abs=1e-6)


# -------------------------------------------------------------------
# TEST structural properties
# -------------------------------------------------------------------

@pytest.mark.parametrize("oracle", ORACLES, ids=["p", "d", "brute"])
def test_value_monotone_in_gamma_running(running, query, oracle):
    values = [oracle(running, [2.0], query(0.5, gamma=g)).value for g in (0.0, 0.1, 0.25, 0.5, 1.0)]
    assert all(b >= a - 1e-7 for a, b in zip(values, values[1:])), f"Q must not fall as Γ grows: {values}"


@pytest.mark.parametrize("seed", range(4))
def test_value_monotone_in_gamma_random(seed):
    rng = np.random.default_rng(seed)
    p = random_rhs_problem(rng, S=4, d_x=2)
    z = rng.uniform(0.0, 5.0, size=2)
    x = rng.uniform(0.0, 1.0, size=2)
    g0 = gamma0(p.scenarios, x)
    for oracle in (oracle_d_bilevel, oracle_bruteforce):
        values = [oracle(p, z, ContextQuery(x=x, gamma=g0 * (1.0 + t) + 1e-9)).value for t in (0.0, 0.2, 0.5, 1.0, 3.0)]
        tol = 1e-6 * (1.0 + max(abs(v) for v in values))
        assert all(b >= a - tol for a, b in zip(values, values[1:])), f"{oracle.__name__}: {values}"


@pytest.mark.parametrize("seed", range(4))
def test_h_star_in_conditioned_hull(seed):
    """
    h* = Σθ_s h_s lies in the hull of the scenarios and in Y_Γ(x) itself.
    """
    p, z, q = _random_case(seed)
    H = p.scenario_h()
    for oracle in ORACLES:
        res = oracle(p, z, q)
        assert np.allclose(res.h_star, res.theta @ H, atol=1e-9)
        assert np.all(res.h_star >= H.min(axis=0) - 1e-9) and np.all(res.h_star <= H.max(axis=0) + 1e-9)
        assert contains(p.scenarios, q.x, res.gamma, q.norm, res.h_star), oracle.__name__


# -------------------------------------------------------------------
# TEST randomized agreement
# -------------------------------------------------------------------

def _random_case(seed, full: bool = False, uncertain_T: bool = False):
    """
    Quick cases use S ≤ 4 with two covariates and W = [I, −I]. Full cases span
    S ≤ 8, d_x ≤ 3, d_h ≤ 4, d_u ≤ 5 and d_z ≤ 3 with a random W.
    """
    rng = np.random.default_rng(seed)
    if full:
        d_h = int(rng.integers(1, 5))
        sizes = dict(
            S=int(rng.integers(2, 9)),
            d_x=int(rng.integers(1, 4)),
            d_h=d_h,
            d_u=int(rng.integers(d_h + 1, 6)),
            d_z=int(rng.integers(1, 4)),
        )
    else:
        sizes = dict(S=int(rng.integers(2, 5)), d_x=2, d_h=2, d_z=2)
    make = random_rhs_T_problem if uncertain_T else random_rhs_problem
    p = make(rng, **sizes)
    z = rng.uniform(0.0, 5.0, size=sizes["d_z"])
    x = rng.uniform(-0.2, 1.2, size=sizes["d_x"])
    norm = "one" if seed % 2 else "inf"
    return p, z, ContextQuery(x=x, delta=float(rng.uniform(0.1, 1.0)), norm=norm)


def _assert_agreement(p, z, q):
    expected = oracle_bruteforce(p, z, q).value
    for oracle in (oracle_p_bilevel, oracle_d_bilevel):
        value = oracle(p, z, q).value
        assert value == pytest.approx(expected, abs=1e-6 * (1.0 + abs(expected))), oracle.__name__


@pytest.mark.parametrize("seed", range(8))
def test_bilevel_oracles_agree_with_bruteforce(seed):
    _assert_agreement(*_random_case(seed))


@pytest.mark.parametrize("seed", range(6))
def test_bilevel_oracles_agree_with_uncertain_T(seed):
    p, z, q = _random_case(seed, uncertain_T=True)
    assert not p.t_is_fixed
    _assert_agreement(p, z, q)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100, 200))
def test_bilevel_oracles_agree_with_bruteforce_many(seed):
    _assert_agreement(*_random_case(seed, full=True))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200, 230))
def test_bilevel_oracles_agree_with_uncertain_T_many(seed):
    _assert_agreement(*_random_case(seed, full=True, uncertain_T=True))
