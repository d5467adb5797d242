# sdk/ddcu/uncertainty_set.py
"""
Geometry of the conditioned set

    Y_Γ(x) = { Σθ_s y_s : θ ≥ 0, Σθ_s = 1, ‖Σθ_s x_s − x‖ ≤ Γ },

answered entirely through LPs: the minimal budget Γ₀, membership, and the
per-coordinate extent of the set.
"""

import math

import numpy as np

from sdk.config.settings import settings, logger
from sdk.core.exceptions import DimensionError, EmptySetError, InputError
from sdk.core.models import Norm, ScenarioSet
from sdk.core.schema import ArrayModel
from sdk.ddcu.budget import theta_block
from sdk.solver.lp_solver import INFEASIBLE, LinearProgram, solve_lp


class CoordinateRanges(ArrayModel):
    lower: np.ndarray
    upper: np.ndarray
    singleton: bool
    gamma0: float
    gamma: float

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower


def _check_context(scenarios: ScenarioSet, x) -> np.ndarray:
    if scenarios.S == 0:
        raise InputError("empty scenario set")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != scenarios.d_x:
        raise DimensionError(f"context has length {x.size}, scenarios have d_x = {scenarios.d_x}")
    return x


def gamma0(scenarios: ScenarioSet, x, norm: Norm = Norm.INF) -> float:
    """
    Distance from x to Conv({x_s}) over the continuous covariates.

    Categorical covariates must match exactly; when no convex combination can
    match them the distance is infinite.

    Returns:
        float: Γ₀ ≥ 0, snapped to exactly 0 when below the feasibility tolerance.
    """
    x = _check_context(scenarios, x)
    X = scenarios.x
    S = scenarios.S
    cat = scenarios.categorical_mask
    cont = np.flatnonzero(~cat)
    n_t = (1 if cont.size else 0) if norm is Norm.INF else cont.size
    n = S + n_t

    block = theta_block(X, x, cat, norm, math.inf)
    A_eq = np.hstack([block.A_eq, np.zeros((block.A_eq.shape[0], n_t))])

    rows, rhs = [], []
    for k, j in enumerate(cont):
        t_col = S if norm is Norm.INF else S + k
        for sign in (1.0, -1.0):
            row = np.zeros(n)
            row[:S] = sign * X[:, j]
            row[t_col] = -1.0
            rows.append(row)
            rhs.append(sign * x[j])

    c = np.concatenate([np.zeros(S), np.ones(n_t)])
    sol = solve_lp(LinearProgram.build(c, A_eq, block.b_eq, np.array(rows).reshape(len(rows), n), rhs))
    if sol.status == INFEASIBLE:
        logger.info("[gamma0] categorical covariates of the context match no convex combination of scenarios")
        return math.inf
    value = max(0.0, sol.objective)
    return 0.0 if value <= settings.FEAS_TOL else value


def contains(scenarios: ScenarioSet, x, gamma: float, norm: Norm, y_candidate) -> bool:
    """True iff y_candidate ∈ Y_Γ(x), decided by one LP feasibility solve."""
    x = _check_context(scenarios, x)
    if gamma < 0:
        raise InputError(f"gamma must be nonnegative, got {gamma}")
    Y = scenarios.uncertain_matrix()
    y = np.asarray(y_candidate, dtype=float).reshape(-1)
    if y.size != Y.shape[1]:
        raise DimensionError(f"candidate has length {y.size}, uncertain vectors have {Y.shape[1]}")
    block = theta_block(scenarios.x, x, scenarios.categorical_mask, norm, gamma)
    match = np.hstack([Y.T, np.zeros((Y.shape[1], block.n_aux))])
    lp = LinearProgram.build(
        np.zeros(block.n),
        np.vstack([block.A_eq, match]),
        np.concatenate([block.b_eq, y]),
        block.A_in,
        block.b_in,
    )
    return solve_lp(lp).status == "optimal"


def coordinate_ranges(scenarios: ScenarioSet, x, gamma: float, norm: Norm = Norm.INF) -> CoordinateRanges:
    """
    Per-coordinate [min, max] of ỹ over Y_Γ(x), by 2·d_y LPs.

    Raises:
        EmptySetError: If gamma < Γ₀ (the error carries Γ₀).
    """
    x = _check_context(scenarios, x)
    g0 = gamma0(scenarios, x, norm)
    if math.isinf(g0) or gamma < g0 - settings.FEAS_TOL:
        raise EmptySetError(f"gamma {gamma:.6g} is below gamma0 {g0:.6g}: the conditioned set is empty", g0)
    gamma_eff = max(gamma, g0)

    Y = scenarios.uncertain_matrix()
    block = theta_block(scenarios.x, x, scenarios.categorical_mask, norm, gamma_eff)
    lower = np.zeros(Y.shape[1])
    upper = np.zeros(Y.shape[1])
    for k in range(Y.shape[1]):
        for sign, target in ((1.0, lower), (-1.0, upper)):
            c = np.concatenate([sign * Y[:, k], np.zeros(block.n_aux)])
            sol = solve_lp(LinearProgram.build(c, block.A_eq, block.b_eq, block.A_in, block.b_in))
            if not sol.is_optimal:
                raise EmptySetError(f"conditioned set is empty at gamma {gamma_eff:.6g}", g0)
            target[k] = sign * sol.objective
    upper = np.maximum(upper, lower)
    singleton = bool(np.all(upper - lower <= settings.SINGLETON_TOL))
    return CoordinateRanges(lower=lower, upper=upper, singleton=singleton, gamma0=g0, gamma=gamma_eff)
