# sdk/oracle/bilevel.py
"""
Worst-case recourse oracles Q(z, x) = max_{y ∈ Y_Γ(x)} min_u {q·u : W u = h − T z, u ≥ 0}.

* `oracle_p_bilevel` keeps the recourse LP as the lower level and maximises
  over the scenario weights θ.
* `oracle_d_bilevel` maximises over dual vertices π ∈ Π and keeps the dualised
  θ-problem min{ρ + x·γ + Γ‖γ‖_* : ρ + x_s·γ ≥ πᵀ(h_s − T_s z)} as the lower level.

Both are solved as big-M KKT mixed-binary programs. M is sized from a bound on
‖π‖∞ over Π and doubled whenever the optimum presses against it.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from sdk.config.settings import settings, logger
from sdk.core.exceptions import BigMError, DimensionError, InputError, LimitError, UnboundedOracleError
from sdk.core.models import ContextQuery, TwoStageProblem
from sdk.ddcu.budget import BudgetSpec, dual_norm_block, resolve_budget, theta_block
from sdk.oracle.kkt import BigM, InnerBlock, KktProgram, OuterBlock, build_kkt_program
from sdk.oracle.recourse import (
    RecourseOutcome,
    dual_polytope_bound,
    improving_ray,
    lower_multipliers,
    scenario_recourse,
    solve_recourse,
)
from sdk.oracle.result import OracleResult
from sdk.solver.milp_solver import GAP_NOT_CLOSED, MilpResult, solve_milp
from sdk.solver.lp_solver import INFEASIBLE, UNBOUNDED


@dataclass(frozen=True)
class OracleData:
    """Everything an oracle needs at one (z, x): scenario right-hand sides and M sizing."""

    problem: TwoStageProblem
    z: np.ndarray
    x: np.ndarray
    budget: BudgetSpec
    R: np.ndarray
    """Rows r_s = h_s − T_s z."""
    scenarios: List[RecourseOutcome]
    pi_bound: float
    pi_bound_rigorous: bool

    @property
    def S(self) -> int:
        return self.R.shape[0]


def prepare_oracle(p: TwoStageProblem, z, query: ContextQuery, budget: Optional[BudgetSpec] = None) -> OracleData:
    """
    Validate the call, resolve Γ and check complete recourse scenario by scenario.

    Raises:
        InputError: For objective uncertainty or a wrongly sized z.
        EmptySetError: If Γ < Γ₀.
        UnboundedOracleError: If Π has a ray along which some scenario's dual value grows.
        IncompleteRecourseError: If some scenario's recourse LP is infeasible.
    """
    if not p.uncertainty_kind.is_rhs:
        raise InputError("oracles evaluate right-hand-side uncertainty; use solve_objective_uncertainty for q")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != p.d_z:
        raise DimensionError(f"z has length {z.size}, d_z = {p.d_z}")
    x = np.asarray(query.x, dtype=float)
    if x.size != p.scenarios.d_x:
        raise DimensionError(f"context has length {x.size}, scenarios have d_x = {p.scenarios.d_x}")
    budget = budget if budget is not None else resolve_budget(p.scenarios, query)
    R = p.rhs(z)

    bound = dual_polytope_bound(p.W, p.q)
    rigorous = math.isfinite(bound)
    if not rigorous:
        ray = improving_ray(p.W, R)
        if ray is not None:
            s, d = ray
            raise UnboundedOracleError(
                f"worst-case recourse value is unbounded: Π has a ray improving scenario {s} at this z",
                {"scenario": s, "theta": np.eye(R.shape[0])[s].tolist(), "ray": d.tolist()},
            )
    outcomes = scenario_recourse(p.W, p.q, R)
    if not rigorous:
        bound = max((float(np.max(np.abs(o.pi))) if o.pi.size else 0.0) for o in outcomes)
        logger.debug(f"[prepare_oracle] Π is unbounded without improving rays; sizing M from scenario duals (max |π| = {bound:.6g})")
    return OracleData(p, z, x, budget, R, outcomes, bound, rigorous)


def _node_trace(method: str) -> Optional[Callable[[int, float, float, int], None]]:
    if not settings.ORACLE_TRACE:
        return None

    def trace(node: int, bound: float, incumbent: float, open_nodes: int) -> None:
        logger.info(f"[{method}] node={node} bound={bound:.9g} incumbent={incumbent:.9g} open={open_nodes}")

    return trace


def _normalized(theta: np.ndarray) -> np.ndarray:
    theta = np.maximum(np.asarray(theta, dtype=float), 0.0)
    return theta / theta.sum()


def _solve_escalating(
    method: str,
    data: OracleData,
    build: Callable[[float], KktProgram],
    theta_of: Callable[[KktProgram, np.ndarray], np.ndarray],
) -> Tuple[KktProgram, MilpResult, int]:
    """
    Solve the KKT program, doubling every M while the optimum touches one.

    A clean optimum must also agree with the recourse LP at its scenario
    weights; a KKT point that disagrees was cut off by M and is escalated too.

    Raises:
        BigMError: After settings.BIGM_ESCALATIONS doublings without a clean optimum.
        LimitError: If branch and bound stops at the node limit.
    """
    factor = 1.0
    trace = _node_trace(method)
    for attempt in range(settings.BIGM_ESCALATIONS + 1):
        kkt = build(factor)
        res = solve_milp(kkt.program, gap_tol=settings.ORACLE_GAP_TOL, trace=trace)
        if res.status == UNBOUNDED:
            raise UnboundedOracleError(f"[{method}] worst-case recourse value is unbounded")
        if res.status == GAP_NOT_CLOSED:
            raise LimitError(f"[{method}] node limit reached before the oracle gap closed", {"nodes": res.nodes})
        reason = None
        if res.status == INFEASIBLE:
            reason = "KKT system infeasible"
        elif kkt.near_big_m(res.primal):
            reason = "optimum within 1% of M"
        else:
            bad = kkt.complementarity_violations(res.primal, settings.COMPLEMENTARITY_TOL)
            if bad:
                reason = f"{len(bad)} complementarity violation(s)"
            else:
                r_star = _normalized(theta_of(kkt, res.primal)) @ data.R
                value = solve_recourse(data.problem.W, data.problem.q, r_star).value
                if abs(res.objective - value) > 1e-6 * (1.0 + abs(value)):
                    reason = f"MILP value {res.objective:.9g} differs from recourse value {value:.9g}"
        if reason is None:
            return kkt, res, attempt
        logger.debug(f"[{method}] big-M too small ({reason}); doubling (attempt {attempt + 1})")
        factor *= 2.0
    raise BigMError(
        f"[{method}] big-M still too small after {settings.BIGM_ESCALATIONS} escalations",
        {"escalations": settings.BIGM_ESCALATIONS},
    )


def finish_oracle(data: OracleData, theta: np.ndarray, method: str, nodes: int = 0, escalations: int = 0) -> OracleResult:
    """
    Turn worst-case scenario weights into an OracleResult.

    The value and π come from the recourse LP at r* = Σθ_s r_s, so π is a
    vertex of Π; (ρ, γ) come from the lower-level LP at that π.
    """
    p = data.problem
    theta = _normalized(theta)
    r_star = theta @ data.R
    outcome = solve_recourse(p.W, p.q, r_star, theta)
    value = outcome.value

    X = p.scenarios.x
    lower, rho, gamma_vec = lower_multipliers(data.budget, X, data.x, data.R @ outcome.pi)
    if abs(lower - value) > 1e-6 * (1.0 + abs(value)):
        logger.warning(f"[{method}] lower-level value {lower:.9g} differs from recourse value {value:.9g}")

    h_star = theta @ p.scenario_h()
    T_star = np.einsum("s,sij->ij", theta, p.scenario_T())
    return OracleResult(
        value=value,
        pi=outcome.pi,
        theta=theta,
        h_star=h_star,
        T_star=T_star,
        rho=rho,
        gamma_vec=gamma_vec,
        x_tilde=theta @ X,
        method=method,
        nodes=nodes,
        big_m_escalations=escalations,
        gamma0=data.budget.gamma0,
        gamma=data.budget.gamma,
    )


# ----------------------------------------------------------------------------
# P-Bilevel
# ----------------------------------------------------------------------------
def _p_bilevel_program(data: OracleData, factor: float) -> KktProgram:
    p = data.problem
    budget = data.budget
    block = theta_block(p.scenarios.x, data.x, budget.categorical_mask, budget.norm, budget.gamma)
    outer = OuterBlock(
        cost=np.zeros(block.n),
        A_eq=block.A_eq,
        b_eq=block.b_eq,
        A_in=block.A_in,
        b_in=block.b_in,
        lb=np.zeros(block.n),
        ub=np.full(block.n, np.inf),
    )
    d_h, d_u = p.W.shape
    inner = InnerBlock(
        f=np.asarray(p.q, dtype=float),
        G=np.zeros((0, d_u)),
        g0=np.zeros(0),
        H=np.zeros((0, block.n)),
        E=np.asarray(p.W, dtype=float),
        e0=np.zeros(d_h),
        K=np.hstack([data.R.T, np.zeros((d_h, block.n_aux))]),
        nonneg=np.ones(d_u, dtype=bool),
    )
    u_max = max(float(np.max(o.u)) if o.u.size else 0.0 for o in data.scenarios)
    r_max = float(np.max(np.abs(data.R))) if data.R.size else 0.0
    m_u = 10.0 * (1.0 + u_max + r_max)
    w_max = float(np.max(np.abs(p.W))) if p.W.size else 0.0
    q_max = float(np.max(np.abs(p.q))) if p.q.size else 0.0
    m_mu = 10.0 * (1.0 + q_max + w_max * d_h * data.pi_bound)
    big_m = BigM(
        slack=np.zeros(0),
        dual=np.zeros(0),
        var=np.full(d_u, m_u),
        reduced=np.full(d_u, m_mu),
        watch_duals=True,
    )
    return build_kkt_program(outer, inner, big_m.scaled(factor))


def oracle_p_bilevel(p: TwoStageProblem, z, q: ContextQuery, budget: Optional[BudgetSpec] = None) -> OracleResult:
    """
    Worst case over scenario weights with the recourse LP as lower level.

    Args:
        p (TwoStageProblem): Problem with right-hand-side uncertainty.
        z: First-stage decision.
        q (ContextQuery): Context and budget.
        budget (BudgetSpec, optional): Pre-resolved budget (skips the Γ₀ LP).

    Returns:
        OracleResult: method "p".
    """
    data = prepare_oracle(p, z, q, budget)
    kkt, res, escalations = _solve_escalating(
        "oracle_p_bilevel", data, lambda f: _p_bilevel_program(data, f), lambda k, v: k.split(v)[0][: data.S]
    )
    theta = kkt.split(res.primal)[0][: data.S]
    result = finish_oracle(data, theta, "p", res.nodes, escalations)
    logger.debug(f"[oracle_p_bilevel] Q={result.value:.9g} nodes={res.nodes} escalations={escalations}")
    return result


# ----------------------------------------------------------------------------
# D-Bilevel
# ----------------------------------------------------------------------------
def _min_covariate_gap(X: np.ndarray, x: np.ndarray, continuous: np.ndarray) -> float:
    values = []
    for j in np.flatnonzero(continuous):
        col = np.concatenate([X[:, j], [x[j]]])
        diffs = np.abs(col[:, None] - col[None, :])
        positive = diffs[diffs > 1e-9]
        if positive.size:
            values.append(float(positive.min()))
    return min(values) if values else 1.0


def _d_bilevel_program(data: OracleData, factor: float) -> KktProgram:
    p = data.problem
    budget = data.budget
    X = p.scenarios.x
    S, d_h = data.S, p.d_h
    h_only = p.t_is_fixed

    outer = OuterBlock(
        cost=-(p.fixed_T() @ data.z) if h_only else np.zeros(d_h),
        A_eq=np.zeros((0, d_h)),
        b_eq=np.zeros(0),
        A_in=np.asarray(p.W, dtype=float).T,
        b_in=np.asarray(p.q, dtype=float),
        lb=np.full(d_h, -np.inf),
        ub=np.full(d_h, np.inf),
    )

    block = dual_norm_block(budget.categorical_mask, budget.norm, budget.gamma)
    n_w = 1 + block.n
    n_g = block.G.shape[0]
    scen_rows = np.hstack([np.ones((S, 1)), X @ block.gamma_map])
    norm_rows = np.hstack([np.zeros((n_g, 1)), block.G])
    H_scen = p.scenario_h() if h_only else data.R
    inner = InnerBlock(
        f=np.concatenate([[1.0], data.x @ block.gamma_map + block.cost]),
        G=np.vstack([scen_rows, norm_rows]).reshape(S + n_g, n_w),
        g0=np.zeros(S + n_g),
        H=np.vstack([H_scen, np.zeros((n_g, d_h))]),
        E=np.zeros((0, n_w)),
        e0=np.zeros(0),
        K=np.zeros((0, d_h)),
        nonneg=np.concatenate([[False], block.lb == 0.0]),
    )

    scale = float(np.max(np.sum(np.abs(H_scen), axis=1))) if H_scen.size else 0.0
    gap = _min_covariate_gap(X, data.x, budget.continuous)
    m_w = 10.0 * (1.0 + data.pi_bound * scale) * (1.0 + 1.0 / gap)
    gamma = 0.0 if math.isinf(budget.gamma) else budget.gamma

    reduced = []
    for k in np.flatnonzero(block.lb == 0.0):
        col = block.gamma_map[:, k]
        if not np.any(col):
            reduced.append(gamma)
        else:
            j = int(np.argmax(np.abs(col)))
            reduced.append(gamma + abs(data.x[j]) + float(np.max(np.abs(X[:, j]))) + 1.0)
    reduced = np.array(reduced, dtype=float)

    big_m = BigM(
        slack=np.full(S + n_g, m_w),
        dual=np.concatenate([np.ones(S), np.full(n_g, gamma)]),
        var=np.full(reduced.size, m_w),
        reduced=reduced,
        watch_duals=False,
    )
    return build_kkt_program(outer, inner, big_m.scaled(factor))


def oracle_d_bilevel(p: TwoStageProblem, z, q: ContextQuery, budget: Optional[BudgetSpec] = None) -> OracleResult:
    """
    Worst case over dual vertices π with the dualised θ-problem as lower level.

    With a scenario-independent T the term −πᵀT z is moved to the outer
    objective and the scenario rows carry h_sᵀπ only.

    Returns:
        OracleResult: method "d"; `pi` is the extreme point used by contextual cuts.
    """
    data = prepare_oracle(p, z, q, budget)
    kkt, res, escalations = _solve_escalating(
        "oracle_d_bilevel", data, lambda f: _d_bilevel_program(data, f), lambda k, v: k.split(v)[2][: data.S]
    )
    theta = kkt.split(res.primal)[2][: data.S]
    result = finish_oracle(data, theta, "d", res.nodes, escalations)
    logger.debug(f"[oracle_d_bilevel] Q={result.value:.9g} nodes={res.nodes} escalations={escalations}")
    return result
