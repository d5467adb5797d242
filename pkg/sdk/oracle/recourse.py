# sdk/oracle/recourse.py
"""
Second-stage LP helpers shared by every oracle:

* the recourse LP min{q·u : W u = r, u ≥ 0} and its dual vertex π,
* per-scenario completeness checks and recession rays of Π,
* bounds on ‖π‖∞ over Π = {π : Wᵀπ ≤ q} used to size big-M constants,
* the lower-level LP that recovers (ρ, γ) for a fixed π.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from sdk.config.settings import settings, logger
from sdk.core.exceptions import EmptySetError, IncompleteRecourseError, UnboundedOracleError
from sdk.ddcu.budget import BudgetSpec, dual_norm_block
from sdk.solver.lp_solver import INFEASIBLE, UNBOUNDED, LinearProgram, solve_lp


@dataclass(frozen=True)
class RecourseOutcome:
    value: float
    pi: np.ndarray
    u: np.ndarray


def solve_recourse(W: np.ndarray, q: np.ndarray, r: np.ndarray, theta: Optional[np.ndarray] = None) -> RecourseOutcome:
    """
    Solve min{q·u : W u = r, u ≥ 0}.

    Raises:
        IncompleteRecourseError: If the LP is infeasible (carries `theta` when given).
        UnboundedOracleError: If the LP is unbounded (Π is empty).
    """
    sol = solve_lp(LinearProgram.build(q, A_eq=W, b_eq=r))
    if sol.status == INFEASIBLE:
        raise IncompleteRecourseError("recourse LP is infeasible: recourse is not complete", theta)
    if sol.status == UNBOUNDED:
        raise UnboundedOracleError("recourse LP is unbounded: the dual polytope {π : Wᵀπ ≤ q} is empty")
    return RecourseOutcome(value=sol.objective, pi=sol.dual_eq, u=sol.primal)


def scenario_recourse(W: np.ndarray, q: np.ndarray, R: np.ndarray) -> List[RecourseOutcome]:
    """
    Solve the recourse LP at every scenario right-hand side r_s (rows of R).

    Feasibility at every r_s implies feasibility on their convex hull, so this
    certifies complete recourse over the whole uncertainty set.
    """
    S = R.shape[0]
    out = []
    for s in range(S):
        out.append(solve_recourse(W, q, R[s], theta=np.eye(S)[s]))
    return out


def dual_polytope_bound(W: np.ndarray, q: np.ndarray) -> float:
    """
    max ‖π‖∞ over Π = {π : Wᵀπ ≤ q}, by 2·d_h LPs; +inf when Π is unbounded.

    Raises:
        UnboundedOracleError: If Π is empty.
    """
    d_h = W.shape[0]
    free = np.full(d_h, -np.inf)
    bound = 0.0
    for i in range(d_h):
        for sign in (1.0, -1.0):
            c = np.zeros(d_h)
            c[i] = -sign
            sol = solve_lp(LinearProgram.build(c, A_in=W.T, b_in=q, lb=free))
            if sol.status == INFEASIBLE:
                raise UnboundedOracleError("the dual polytope {π : Wᵀπ ≤ q} is empty")
            if sol.status == UNBOUNDED:
                bound = math.inf
                break
            bound = max(bound, abs(sol.objective))
        if math.isinf(bound):
            break
    logger.debug(f"[dual_polytope_bound] max |π| over Π = {bound:.6g}")
    return bound


def improving_ray(W: np.ndarray, R: np.ndarray) -> Optional[Tuple[int, np.ndarray]]:
    """
    Look for a recession direction d of Π (Wᵀd ≤ 0, ‖d‖∞ ≤ 1) with dᵀr_s > 0.

    One LP per scenario row of R. Such a d makes πᵀr_s grow without bound
    along Π, so the worst case over any set containing r_s is +inf.

    Returns:
        (s, d) for the first scenario with an improving ray, else None.
    """
    d_h, d_u = W.shape
    for s in range(R.shape[0]):
        r = R[s]
        sol = solve_lp(LinearProgram.build(-r, A_in=W.T, b_in=np.zeros(d_u), lb=-np.ones(d_h), ub=np.ones(d_h)))
        if sol.is_optimal and -sol.objective > settings.FEAS_TOL * (1.0 + float(np.max(np.abs(r), initial=0.0))):
            return s, sol.primal
    return None


def lower_multipliers(budget: BudgetSpec, X: np.ndarray, x: np.ndarray, a: np.ndarray) -> Tuple[float, float, np.ndarray]:
    """
    min ρ + x·γ + Γ‖γ‖_*  s.t.  ρ + x_s·γ ≥ a_s  for every scenario s.

    Its value equals max{Σθ_s a_s : θ feasible for the conditioned set}.

    Returns:
        (value, ρ, γ)
    """
    block = dual_norm_block(budget.categorical_mask, budget.norm, budget.gamma)
    S = X.shape[0]
    n = 1 + block.n
    c = np.concatenate([[1.0], x @ block.gamma_map + block.cost])
    rows = np.hstack([-np.ones((S, 1)), -(X @ block.gamma_map)])
    g_rows = np.hstack([np.zeros((block.G.shape[0], 1)), -block.G])
    lp = LinearProgram.build(
        c,
        A_in=np.vstack([rows, g_rows]).reshape(-1, n),
        b_in=np.concatenate([-np.asarray(a, dtype=float), np.zeros(block.G.shape[0])]),
        lb=np.concatenate([[-np.inf], block.lb]),
        ub=np.concatenate([[np.inf], block.ub]),
    )
    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise EmptySetError(
            f"lower-level LP is {sol.status}: gamma {budget.gamma:.6g} admits no scenario weights", budget.gamma0
        )
    w = sol.primal[1:]
    gamma_vec = block.gamma_of(w)
    gamma_vec = np.where(np.abs(gamma_vec) <= settings.FEAS_TOL, 0.0, gamma_vec)
    return sol.objective, float(sol.primal[0]), gamma_vec
