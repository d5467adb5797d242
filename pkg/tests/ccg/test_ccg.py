# tests/ccg/test_ccg.py

import json
import math

import numpy as np
import pytest

from sdk.ccg.algorithm import INFEASIBLE, ITERATION_LIMIT, CcgOptions, solve_ccg, warm_start_solve
from sdk.ccg.cut_pool import CutPool, ScenarioPool, pool_load, pool_save
from sdk.ccg.master import MasterProblem, cut_value
from sdk.ccg.objective import solve_objective_uncertainty
from sdk.core.exceptions import (
    FingerprintMismatchError,
    InputError,
    NotFoundError,
    PoolCorruptError,
    PoolValidationError,
)
from sdk.core.models import FirstStage, MasterKind, ScenarioSet, TwoStageProblem, UncertaintyKind
from sdk.ddcu.budget import resolve_budget
from sdk.oracle.bilevel import oracle_d_bilevel
from sdk.oracle.bruteforce import enumerate_theta_vertices, oracle_bruteforce
from sdk.solver.lp_solver import LinearProgram, solve_lp
from tests.helpers import grid_search_running, random_rhs_problem, random_rhs_T_problem, running_problem, write

# -------------------------------------------------------------------
# TEST solve_ccg on the running instance
# -------------------------------------------------------------------

@pytest.mark.parametrize("master", [MasterKind.CONTEXTUAL, MasterKind.CLASSICAL])
@pytest.mark.parametrize("oracle", ["d", "p"])
@pytest.mark.parametrize("gamma, expected", [(0.0, 5.0), (0.5, 10.0)])
def test_running_objective(running, query, master, oracle, gamma, expected):
    """
    min_z z + max(0, h̃ − z) with h̃ = 5 at Γ = 0 and h̃ = 10 at Γ = 0.5.
    """
    sol, _ = solve_ccg(running, query(0.5, gamma=gamma), CcgOptions(master_kind=master, oracle=oracle))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(expected, abs=1e-6)
    assert sol.master_kind is master


@pytest.mark.parametrize("x, gamma", [(0.2, 0.1), (0.7, 0.05), (1.3, 0.4)])
def test_matches_grid_search(running, query, x, gamma):
    sol, _ = solve_ccg(running, query(x, gamma=gamma))
    assert sol.objective == pytest.approx(grid_search_running(x, gamma), abs=1e-3)


def test_bound_traces(running, query):
    """
    LB is −∞ until a cut exists, never decreases, and ends within the gap of UB.
    """
    opts = CcgOptions()
    sol, pool = solve_ccg(running, query(0.5, gamma=0.5), opts)
    assert math.isinf(sol.lb_trace[0]) and sol.lb_trace[0] < 0
    finite = [v for v in sol.lb_trace if math.isfinite(v)]
    assert finite == sorted(finite)
    assert np.all(np.diff(sol.ub_trace) <= 1e-12), "UB only improves"
    assert sol.objective - sol.lb_trace[-1] <= opts.gap_tol * (1.0 + abs(sol.objective))
    assert len(pool) >= 1
    assert sol.oracle_calls == len(sol.ub_trace) or sol.oracle_calls == len(sol.ub_trace) - 1


def test_iteration_limit(running, query):
    sol, _ = solve_ccg(running, query(0.5, gamma=0.5), CcgOptions(max_iterations=1))
    assert sol.status == ITERATION_LIMIT
    assert not sol.is_optimal
    assert sol.oracle_calls == 1


def test_classical_master_returns_scenarios(running, query):
    sol, pool = solve_ccg(running, query(0.5, gamma=0.5), CcgOptions(master_kind=MasterKind.CLASSICAL))
    assert isinstance(pool, ScenarioPool)
    assert pool.scenarios[0].h[0] == pytest.approx(10.0, abs=1e-6)


def test_objective_problem_routed_elsewhere(objective, query):
    with pytest.raises(InputError):
        solve_ccg(objective, query(0.5, gamma=0.0))


def test_bad_options_rejected():
    with pytest.raises(ValueError):
        CcgOptions(gap_tol=0.0)
    with pytest.raises(ValueError):
        CcgOptions(oracle="brute")


def test_empty_first_stage_reported_as_status(query):
    """
    z ≤ −1 contradicts z ≥ 0: the solve returns status infeasible without calling an oracle.
    """
    p = running_problem().model_copy(update={"Z": FirstStage.box([0.0], [10.0], A_in=[[1.0]], b_in=[-1.0])})
    sol, _ = solve_ccg(p, query(0.5, gamma=0.5))
    assert sol.status == INFEASIBLE
    assert not sol.is_optimal
    assert sol.z.size == 0
    assert math.isinf(sol.objective) and sol.objective > 0
    assert sol.oracle_calls == 0


# -------------------------------------------------------------------
# TEST scenario-dependent T
# -------------------------------------------------------------------

def test_uncertain_T_solve_matches_bruteforce_value(query):
    """
    UB is c·z* + Q(z*) at the returned point and no sampled z does better.
    """
    rng = np.random.default_rng(3)
    p = random_rhs_T_problem(rng, S=4, d_x=2)
    q = query([0.4, 0.6], delta=0.5)
    opts = CcgOptions()
    sol, pool = solve_ccg(p, q, opts)
    assert sol.status == "optimal"
    assert len(pool) >= 1

    at_z = float(p.c @ sol.z) + oracle_bruteforce(p, sol.z, q).value
    assert sol.objective == pytest.approx(at_z, abs=1e-6 * (1.0 + abs(at_z)))
    slack = opts.gap_tol * (1.0 + abs(sol.objective)) + 1e-6
    for _ in range(6):
        z = rng.uniform(0.0, 5.0, size=p.d_z)
        assert sol.objective <= float(p.c @ z) + oracle_bruteforce(p, z, q).value + slack

    classical, scenarios = solve_ccg(p, q, CcgOptions(master_kind=MasterKind.CLASSICAL))
    assert classical.objective == pytest.approx(sol.objective, abs=2.0 * slack)
    assert all(e.T.shape == (p.d_h, p.d_z) for e in scenarios.scenarios), "classical master stores T* with h*"


# -------------------------------------------------------------------
# TEST contextual cuts
# -------------------------------------------------------------------

def test_cut_underestimates_recourse(rng, query):
    """
    Every stored π gives L_π(z, x) ≤ Q(z, x) at fresh points.
    """
    p = random_rhs_problem(rng)
    q = query([0.4, 0.6], delta=0.5)
    _, pool = solve_ccg(p, q)
    budget = resolve_budget(p.scenarios, q)
    for _ in range(5):
        z = rng.uniform(0.0, 5.0, size=p.d_z)
        value = oracle_d_bilevel(p, z, q, budget).value
        for e in pool.entries:
            assert cut_value(p, budget, q.x, e.pi, z) <= value + 1e-6


def test_master_rejects_wrong_cut_kind(running, query):
    q = query(0.5, gamma=0.5)
    master = MasterProblem(running, resolve_budget(running.scenarios, q), q.x, MasterKind.CLASSICAL)
    with pytest.raises(InputError):
        master.add_pi(np.array([1.0]))


# -------------------------------------------------------------------
# TEST warm start and pool files
# -------------------------------------------------------------------

def test_warm_start_same_answer_fewer_calls(running, query):
    """
    A pool from x = 0.5 lets the solve at x = 0.3 reach the cold optimum with no more oracle calls.
    """
    _, pool = solve_ccg(running, query(0.5, gamma=0.5))
    cold, _ = solve_ccg(running, query(0.3, gamma=0.5))
    warm, grown = warm_start_solve(running, query(0.3, gamma=0.5), pool)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-6)
    assert warm.oracle_calls <= cold.oracle_calls
    assert len(grown) >= len(pool)


def test_pool_file_round_trip(tmp_path, running, query):
    _, pool = solve_ccg(running, query(0.5, gamma=0.5))
    path = str(tmp_path / "pool.json")
    pool_save(pool, path)
    loaded = pool_load(path, running)
    assert loaded.fingerprint == pool.fingerprint
    assert len(loaded) == len(pool)
    assert np.allclose(loaded.entries[0].pi, pool.entries[0].pi)


def test_infeasible_pi_rejected(tmp_path, running):
    """
    π = 5 violates Wᵀπ ≤ q on the first row (5 > 1).
    """
    path = write(
        tmp_path / "pool.json",
        {
            "format_version": 1,
            "fingerprint": running.fingerprint(),
            "entries": [{"pi": [5.0], "source_context": [0.5], "source_iteration": 0}],
        },
    )
    with pytest.raises(PoolValidationError) as info:
        pool_load(path, running)
    assert info.value.entry == 0
    assert info.value.row == 0


def test_fingerprint_mismatch(running, query):
    _, pool = solve_ccg(running, query(0.5, gamma=0.5))
    other = running.model_copy(update={"q": np.array([2.0, 0.0])})
    with pytest.raises(FingerprintMismatchError):
        warm_start_solve(other, query(0.5, gamma=0.5), pool)


def test_scenario_pool_cannot_warm_start(running, query):
    _, pool = solve_ccg(running, query(0.5, gamma=0.5), CcgOptions(master_kind=MasterKind.CLASSICAL))
    with pytest.raises(InputError):
        warm_start_solve(running, query(0.3, gamma=0.5), pool)


def test_corrupt_pool_file(tmp_path):
    path = tmp_path / "pool.json"
    path.write_text("{not json")
    with pytest.raises(PoolCorruptError):
        pool_load(str(path))
    with pytest.raises(PoolCorruptError):
        pool_load(write(tmp_path / "list.json", [1, 2, 3]))
    with pytest.raises(NotFoundError):
        pool_load(str(tmp_path / "absent.json"))


def test_merge_deduplicates(running, query):
    _, a = solve_ccg(running, query(0.5, gamma=0.5))
    _, b = solve_ccg(running, query(0.1, gamma=0.1))
    merged = a.merge(b)
    assert len(merged) <= len(a) + len(b)
    assert len(merged.merge(merged)) == len(merged)
    foreign = CutPool.for_problem(running_problem(c=2.0).model_copy(update={"q": np.array([3.0, 0.0])}))
    with pytest.raises(FingerprintMismatchError):
        a.merge(foreign)


def test_saved_pool_is_plain_json(tmp_path, running, query):
    _, pool = solve_ccg(running, query(0.5, gamma=0.5))
    path = tmp_path / "pool.json"
    pool_save(pool, str(path))
    data = json.loads(path.read_text())
    assert set(data) == {"format_version", "fingerprint", "entries"}
    assert isinstance(data["entries"][0]["pi"], list)


# -------------------------------------------------------------------
# TEST objective uncertainty
# -------------------------------------------------------------------

def test_objective_uncertainty_values(objective, query):
    """
    u = 4 always; the worst q̃ is 2 at Γ = 0 and 3 once the whole segment is admissible.
    """
    assert solve_objective_uncertainty(objective, query(0.5, gamma=0.0)).objective == pytest.approx(8.0, abs=1e-7)
    assert solve_objective_uncertainty(objective, query(0.5, gamma=5.0)).objective == pytest.approx(12.0, abs=1e-7)


def test_objective_uncertainty_rejects_rhs_problem(running, query):
    with pytest.raises(InputError):
        solve_objective_uncertainty(running, query(0.5, gamma=0.0))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_random_masters_agree(seed, query):
    """
    Contextual and classical masters converge to the same objective.
    """
    rng = np.random.default_rng(seed)
    p = random_rhs_problem(rng)
    q = query(rng.uniform(0.0, 1.0, size=2), delta=0.3)
    contextual, _ = solve_ccg(p, q)
    classical, _ = solve_ccg(p, q, CcgOptions(master_kind=MasterKind.CLASSICAL))
    assert contextual.objective == pytest.approx(classical.objective, abs=1e-5 * (1.0 + abs(classical.objective)))


# -------------------------------------------------------------------
# TEST cuts carried across contexts
# -------------------------------------------------------------------

def _check_pool_valid_at(p, pool, q, opts=None):
    """Carried cuts stay below the recourse at the cold optimum; warm and cold objectives agree."""
    cold, _ = solve_ccg(p, q, opts)
    budget = resolve_budget(p.scenarios, q)
    value = oracle_d_bilevel(p, cold.z, q, budget).value
    for e in pool.entries:
        assert cut_value(p, budget, q.x, e.pi, cold.z) <= value + 1e-6, "Carried cut removes the cold optimum"
    warm, _ = warm_start_solve(p, q, pool, opts)
    assert warm.objective == pytest.approx(cold.objective, abs=3e-6 * (1.0 + abs(cold.objective)))


@pytest.mark.parametrize("seed", range(3))
def test_pool_valid_for_fresh_contexts(seed, query):
    rng = np.random.default_rng(seed)
    p = random_rhs_problem(rng)
    _, pool = solve_ccg(p, query(rng.uniform(size=2), delta=0.2))
    for _ in range(2):
        _check_pool_valid_at(p, pool, query(rng.uniform(-0.2, 1.2, size=2), delta=0.2))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100, 120))
def test_pool_valid_for_fresh_contexts_many(seed, query):
    rng = np.random.default_rng(seed)
    p = random_rhs_problem(rng, S=int(rng.integers(2, 6)), d_x=int(rng.integers(1, 4)))
    _, pool = solve_ccg(p, query(rng.uniform(size=p.scenarios.d_x), delta=0.1))
    for _ in range(5):
        _check_pool_valid_at(p, pool, query(rng.uniform(-0.2, 1.2, size=p.scenarios.d_x), delta=0.1))


def test_bounds_stay_ordered(rng, query):
    p = random_rhs_problem(rng)
    sol, _ = solve_ccg(p, query([0.3, 0.8], delta=0.1))
    for lb, ub in zip(sol.lb_trace, sol.ub_trace):
        assert lb <= ub + 1e-9


# -------------------------------------------------------------------
# TEST objective uncertainty against θ-vertex enumeration
# -------------------------------------------------------------------

def _objective_instance(rng):
    """
    Fixed first stage, W = [I, −I] and positive q-scenarios: the cheapest recourse
    picks the same columns for every θ, so the worst case sits at a vertex.
    """
    S = int(rng.integers(2, 7))
    return TwoStageProblem(
        c=[0.0],
        Z=FirstStage.box([0.0], [0.0]),
        W=np.hstack([np.eye(2), -np.eye(2)]),
        h=rng.uniform(-3.0, 3.0, size=2),
        T=np.zeros((2, 1)),
        scenarios=ScenarioSet(
            x=rng.uniform(size=(S, 2)),
            q=[rng.uniform(0.5, 3.0, size=4) for _ in range(S)],
        ),
        uncertainty_kind=UncertaintyKind.OBJECTIVE_Q,
    )


def _vertex_max(p, q):
    budget = resolve_budget(p.scenarios, q)
    values = []
    for theta in enumerate_theta_vertices(p.scenarios.x, q.x, budget):
        sol = solve_lp(LinearProgram.build(theta @ p.scenario_q(), A_eq=p.W, b_eq=p.h))
        values.append(sol.objective)
    return max(values)


@pytest.mark.parametrize("seed", range(10))
def test_objective_uncertainty_matches_vertices(seed, query):
    rng = np.random.default_rng(seed)
    p = _objective_instance(rng)
    q = query(rng.uniform(-0.2, 1.2, size=2), delta=0.5)
    expected = _vertex_max(p, q)
    assert solve_objective_uncertainty(p, q).objective == pytest.approx(expected, abs=1e-6 * (1.0 + abs(expected)))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100, 140))
def test_objective_uncertainty_matches_vertices_many(seed, query):
    rng = np.random.default_rng(seed)
    p = _objective_instance(rng)
    q = query(rng.uniform(-0.2, 1.2, size=2), delta=float(rng.uniform(0.0, 1.0)), norm="one" if seed % 2 else "inf")
    expected = _vertex_max(p, q)
    assert solve_objective_uncertainty(p, q).objective == pytest.approx(expected, abs=1e-6 * (1.0 + abs(expected)))
