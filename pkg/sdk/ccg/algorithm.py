# sdk/ccg/algorithm.py
"""
Master-oracle loop (column-and-constraint generation).

Each iteration solves the master for a lower bound and a candidate z, calls
the worst-case oracle at z for an upper bound c·z + Q(z, x), and adds the
oracle's output to the master as a cut. The loop stops when

    UB − LB ≤ gap_tol · (1 + |UB|)

or when the iteration cap is reached.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from sdk.config.settings import settings, logger
from sdk.core.exceptions import InfeasibleError, InputError
from sdk.core.models import ContextQuery, MasterKind, Solution, TwoStageProblem
from sdk.ccg.cut_pool import CutPool, ScenarioPool
from sdk.ccg.master import MasterProblem, cut_value
from sdk.ddcu.budget import resolve_budget
from sdk.oracle.bilevel import oracle_d_bilevel, oracle_p_bilevel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"
STALLED = "stalled"

ORACLES = {"d": oracle_d_bilevel, "p": oracle_p_bilevel}


class CcgOptions(BaseModel):
    """
    Options of one CCG solve.

    Attributes:
        gap_tol: Relative stopping gap, > 0.
        max_iterations: Oracle calls allowed before giving up.
        master_kind: `classical` (scenario cuts) or `contextual` (dual-vertex cuts).
        oracle: `d` (dual bilevel) or `p` (primal bilevel).
        warm_pool: Cut pool inserted into the contextual master before iteration 0.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gap_tol: float = Field(default_factory=lambda: settings.GAP_TOL)
    max_iterations: int = Field(default_factory=lambda: settings.MAX_ITERATIONS)
    master_kind: MasterKind = MasterKind.CONTEXTUAL
    oracle: str = "d"
    warm_pool: Optional[CutPool] = None

    @field_validator("gap_tol")
    def _positive_gap(cls, value):
        if not value > 0.0:
            raise ValueError(f"gap_tol must be positive, got {value}")
        return value

    @field_validator("max_iterations")
    def _positive_iterations(cls, value):
        if value < 1:
            raise ValueError(f"max_iterations must be at least 1, got {value}")
        return value

    @field_validator("oracle")
    def _known_oracle(cls, value):
        if value not in ORACLES:
            raise ValueError(f"oracle must be one of {sorted(ORACLES)}, got {value!r}")
        return value


def _converged(lb: float, ub: float, tol: float) -> bool:
    return math.isfinite(ub) and ub - lb <= tol * (1.0 + abs(ub))


def solve_ccg(
    p: TwoStageProblem, q: ContextQuery, opts: Optional[CcgOptions] = None
) -> Tuple[Solution, Union[CutPool, ScenarioPool]]:
    """
    Solve min_{z ∈ Z} c·z + Q(z, x) for the context of `q`.

    Args:
        p (TwoStageProblem): Right-hand-side uncertainty problem.
        q (ContextQuery): Context x, norm and budget.
        opts (CcgOptions, optional): Defaults to a cold contextual solve with the D oracle.

    Returns:
        (Solution, pool): the grown CutPool for the contextual master, a
        ScenarioPool for the classical one.

    An infeasible first stage is reported as status `infeasible` with an empty z.

    Raises:
        IncompleteRecourseError: Propagated from the oracle.
    """
    opts = opts or CcgOptions()
    if not p.uncertainty_kind.is_rhs:
        raise InputError("solve_ccg handles right-hand-side uncertainty; use solve_objective_uncertainty")
    pool = opts.warm_pool
    if pool is not None:
        if opts.master_kind is not MasterKind.CONTEXTUAL:
            raise InputError("only the contextual master can be warm-started from a cut pool")
        pool.check_against(p)

    budget = resolve_budget(p.scenarios, q)
    x = np.asarray(q.x, dtype=float)
    oracle = ORACLES[opts.oracle]
    master = MasterProblem(p, budget, x, opts.master_kind)

    if opts.master_kind is MasterKind.CONTEXTUAL:
        pool = pool if pool is not None else CutPool.for_problem(p)
        for e in pool.entries:
            master.add_pi(e.pi)
        found: Union[CutPool, ScenarioPool] = pool
    else:
        found = ScenarioPool(fingerprint=p.fingerprint(), context=x)

    lb, ub = -math.inf, math.inf
    lb_trace, ub_trace = [], []
    best_z, best_q = None, math.nan
    alpha = None
    status = ITERATION_LIMIT
    calls = 0
    iteration = 0

    for iteration in range(opts.max_iterations):
        try:
            ms = master.solve()
        except InfeasibleError as exc:
            logger.warning(f"[solve_ccg] {exc.message}")
            status = INFEASIBLE
            break
        if master.n_cuts:
            lb = max(lb, ms.objective)
        lb_trace.append(lb)
        alpha = ms.alpha
        if best_z is not None and _converged(lb, ub, opts.gap_tol):
            ub_trace.append(ub)
            status = OPTIMAL
            break

        res = oracle(p, ms.z, q, budget)
        calls += 1
        total = float(p.c @ ms.z) + res.value
        if total < ub:
            ub, best_z, best_q = total, ms.z, res.value
        ub_trace.append(ub)
        logger.info(f"[solve_ccg] iter={iteration} LB={lb:.9g} UB={ub:.9g} Q={res.value:.9g}")
        if _converged(lb, ub, opts.gap_tol):
            status = OPTIMAL
            break

        if opts.master_kind is MasterKind.CONTEXTUAL:
            violation = math.inf if ms.alpha is None else cut_value(p, budget, x, res.pi, ms.z) - ms.alpha
            if found.contains_pi(res.pi) or violation <= opts.gap_tol * (1.0 + abs(ub)):
                logger.warning(f"[solve_ccg] oracle vertex adds no violated cut at iteration {iteration}; stopping")
                status = STALLED
                break
            found = found.with_cut(res.pi, x, iteration)
            master.add_pi(res.pi)
        else:
            if found.contains(res.h_star, res.T_star):
                logger.warning(f"[solve_ccg] worst-case realization repeats at iteration {iteration}; stopping")
                status = STALLED
                break
            found = found.with_scenario(res.h_star, res.T_star, res.theta, iteration)
            master.add_realization(res.h_star, res.T_star)

    if status == INFEASIBLE:
        z, ub, best_q = np.zeros(0), math.inf, math.nan
    else:
        z = best_z if best_z is not None else ms.z
    solution = Solution(
        z=z,
        objective=ub,
        alpha=best_q,
        lb_trace=lb_trace,
        ub_trace=ub_trace,
        iterations=iteration + 1,
        oracle_calls=calls,
        status=status,
        master_kind=opts.master_kind,
        gamma0=budget.gamma0,
        gamma=budget.gamma,
    )
    logger.info(
        f"[solve_ccg] {status}: objective={ub:.9g} iterations={solution.iterations} oracle_calls={calls}"
    )
    return solution, found


def warm_start_solve(
    p: TwoStageProblem, q_new: ContextQuery, pool: CutPool, opts: Optional[CcgOptions] = None
) -> Tuple[Solution, CutPool]:
    """
    Contextual CCG whose master starts with every cut of `pool`, re-expressed for q_new.x.

    Raises:
        FingerprintMismatchError: If the pool was built for a different (W, q).
        PoolValidationError: If a stored π is not dual feasible.
    """
    if not isinstance(pool, CutPool):
        raise InputError("warm starts take a CutPool; scenario pools are not reusable across contexts")
    opts = opts or CcgOptions()
    if opts.master_kind is not MasterKind.CONTEXTUAL:
        raise InputError("only the contextual master can be warm-started from a cut pool")
    return solve_ccg(p, q_new, opts.model_copy(update={"warm_pool": pool}))
