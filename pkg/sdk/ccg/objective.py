# sdk/ccg/objective.py

import numpy as np

from sdk.config.settings import logger
from sdk.core.exceptions import InfeasibleError, InputError
from sdk.core.models import ContextQuery, Solution, TwoStageProblem, UncertaintyKind
from sdk.ddcu.budget import dual_norm_block, resolve_budget
from sdk.solver.lp_solver import INFEASIBLE, UNBOUNDED, LinearProgram, solve_lp


def solve_objective_uncertainty(p: TwoStageProblem, q: ContextQuery) -> Solution:
    """
    Solve the problem exactly when only the recourse cost q is uncertain.

    The worst case over θ is dualised inside a single LP over [z | u | ρ | w]:

        min  c·z + ρ + x·γ + Γ‖γ‖_*
        s.t. W u + T z = h,  u ≥ 0,  z ∈ Z
             ρ + x_s·γ ≥ q_s·u      for every scenario s

    Raises:
        InputError: If the problem does not carry objective uncertainty.
        InfeasibleError: If the LP is infeasible.
    """
    if p.uncertainty_kind is not UncertaintyKind.OBJECTIVE_Q:
        raise InputError("solve_objective_uncertainty needs uncertainty_kind = objective_q")
    budget = resolve_budget(p.scenarios, q)
    block = dual_norm_block(budget.categorical_mask, budget.norm, budget.gamma)
    x = np.asarray(q.x, dtype=float)
    Qs = p.scenario_q()
    S = Qs.shape[0]
    d_z, d_u, d_h = p.d_z, p.d_u, p.d_h
    T = p.fixed_T()

    zs, us, rho = slice(0, d_z), slice(d_z, d_z + d_u), d_z + d_u
    ws = slice(rho + 1, rho + 1 + block.n)
    N = ws.stop

    c = np.zeros(N)
    c[zs] = p.c
    c[rho] = 1.0
    c[ws] = x @ block.gamma_map + block.cost

    lb = np.zeros(N)
    ub = np.full(N, np.inf)
    lb[zs], ub[zs] = p.Z.lb, p.Z.ub
    lb[rho] = -np.inf
    lb[ws], ub[ws] = block.lb, block.ub

    n_eq_z = p.Z.A_eq.shape[0] if p.Z.A_eq.size else 0
    n_in_z = p.Z.A_in.shape[0] if p.Z.A_in.size else 0
    A_eq = np.zeros((n_eq_z + d_h, N))
    b_eq = np.zeros(n_eq_z + d_h)
    if n_eq_z:
        A_eq[:n_eq_z, zs] = p.Z.A_eq
        b_eq[:n_eq_z] = p.Z.b_eq
    A_eq[n_eq_z:, us] = p.W
    A_eq[n_eq_z:, zs] = T
    b_eq[n_eq_z:] = p.h

    n_g = block.G.shape[0]
    A_in = np.zeros((n_in_z + S + n_g, N))
    b_in = np.zeros(n_in_z + S + n_g)
    if n_in_z:
        A_in[:n_in_z, zs] = p.Z.A_in
        b_in[:n_in_z] = p.Z.b_in
    rows = slice(n_in_z, n_in_z + S)
    A_in[rows, us] = Qs
    A_in[rows, rho] = -1.0
    A_in[rows, ws] = -(p.scenarios.x @ block.gamma_map)
    A_in[n_in_z + S:, ws] = -block.G

    sol = solve_lp(LinearProgram.build(c, A_eq, b_eq, A_in, b_in, lb, ub))
    if sol.status == INFEASIBLE:
        raise InfeasibleError("objective-uncertainty LP is infeasible")
    if sol.status == UNBOUNDED:
        raise InputError("objective-uncertainty LP is unbounded")

    z = sol.primal[zs]
    alpha = sol.objective - float(p.c @ z)
    logger.info(f"[solve_objective_uncertainty] objective={sol.objective:.9g} worst-case recourse={alpha:.9g}")
    return Solution(
        z=z,
        objective=sol.objective,
        alpha=alpha,
        lb_trace=[sol.objective],
        ub_trace=[sol.objective],
        iterations=1,
        oracle_calls=0,
        gamma0=budget.gamma0,
        gamma=budget.gamma,
    )
