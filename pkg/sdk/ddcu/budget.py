# sdk/ddcu/budget.py
"""
Budget resolution and the two linear blocks every formulation reuses.

* `theta_block` linearises {θ ≥ 0, Σθ = 1, ‖Σθ_s x_s − x‖ ≤ Γ} over the
  continuous covariates, with equality on categorical ones.
* `dual_norm_block` linearises the lower-level variables γ and the term
  Γ‖γ‖_* of the dualised inner problem, with γ unpenalised on categorical
  covariates and fixed to zero on continuous ones when Γ = ∞.
"""

import math
from dataclasses import dataclass

import numpy as np
from pydantic import field_validator

from sdk.config.settings import settings, logger
from sdk.core.exceptions import DimensionError, EmptySetError
from sdk.core.models import ContextQuery, Norm, ScenarioSet
from sdk.core.schema import ArrayModel


class BudgetSpec(ArrayModel):
    """Resolved budget of one query: Γ₀, the Γ actually used, and the categorical mask."""

    gamma0: float
    gamma: float
    norm: Norm
    categorical_mask: np.ndarray

    @field_validator("categorical_mask", mode="before")
    def _coerce_mask(cls, value):
        mask = np.array(value, dtype=bool).reshape(-1)
        mask.flags.writeable = False
        return mask

    @property
    def continuous(self) -> np.ndarray:
        return ~self.categorical_mask

    @property
    def component_budget(self) -> np.ndarray:
        return np.where(self.categorical_mask, 0.0, self.gamma)

    @property
    def is_unconditional(self) -> bool:
        return math.isinf(self.gamma)

    def dual_norm(self, gamma_vec: np.ndarray) -> float:
        """‖γ‖_* over the continuous components."""
        return self.norm.dual.of(np.asarray(gamma_vec)[self.continuous])


def resolve_budget(scenarios: ScenarioSet, query: ContextQuery) -> BudgetSpec:
    """
    Compute Γ₀ for the query and fix Γ = explicit value or (1+δ)·Γ₀.

    Raises:
        EmptySetError: If Γ₀ is infinite (unseen category) or Γ < Γ₀.
    """
    from sdk.ddcu.uncertainty_set import gamma0 as compute_gamma0

    g0 = compute_gamma0(scenarios, query.x, query.norm)
    if math.isinf(g0):
        raise EmptySetError("context category was never observed: the conditioned set is empty", g0)
    if query.gamma is not None:
        gamma = query.gamma
    else:
        delta = settings.DELTA if query.delta is None else query.delta
        gamma = (1.0 + delta) * g0
    if gamma < g0 - settings.FEAS_TOL:
        raise EmptySetError(f"gamma {gamma:.6g} is below gamma0 {g0:.6g}: the conditioned set is empty", g0)
    gamma = max(gamma, g0)
    logger.debug(f"[resolve_budget] gamma0={g0:.6g} gamma={gamma:.6g} norm={query.norm.value}")
    return BudgetSpec(gamma0=g0, gamma=gamma, norm=query.norm, categorical_mask=scenarios.categorical_mask)


@dataclass(frozen=True)
class ThetaBlock:
    """Rows over [θ (S), aux (n_aux)] describing the feasible scenario weights."""

    n_theta: int
    n_aux: int
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_in: np.ndarray
    b_in: np.ndarray

    @property
    def n(self) -> int:
        return self.n_theta + self.n_aux


def theta_block(X: np.ndarray, x: np.ndarray, categorical: np.ndarray, norm: Norm, gamma: float) -> ThetaBlock:
    """
    Linear description of the scenario weights admitted by the ε-ball.

    ∞-norm: ±(X_j·θ − x_j) ≤ Γ for each continuous j (no auxiliaries).
    1-norm: ±(X_j·θ − x_j) ≤ t_j, Σt_j ≤ Γ, t ≥ 0.
    Categorical j: X_j·θ = x_j. Γ = ∞ drops the continuous rows.
    """
    S, d_x = X.shape
    x = np.asarray(x, dtype=float)
    if x.size != d_x:
        raise DimensionError(f"[theta_block] context has length {x.size}, covariates have {d_x}")
    cont = np.flatnonzero(~categorical)
    cat = np.flatnonzero(categorical)
    finite = not math.isinf(gamma)
    n_aux = cont.size if (finite and norm is Norm.ONE) else 0
    n = S + n_aux

    eq_rows = [np.concatenate([np.ones(S), np.zeros(n_aux)])]
    eq_rhs = [1.0]
    for j in cat:
        eq_rows.append(np.concatenate([X[:, j], np.zeros(n_aux)]))
        eq_rhs.append(x[j])

    in_rows, in_rhs = [], []
    if finite:
        for k, j in enumerate(cont):
            for sign in (1.0, -1.0):
                row = np.zeros(n)
                row[:S] = sign * X[:, j]
                if norm is Norm.ONE:
                    row[S + k] = -1.0
                    in_rhs.append(sign * x[j])
                else:
                    in_rhs.append(sign * x[j] + gamma)
                in_rows.append(row)
        if n_aux:
            row = np.zeros(n)
            row[S:] = 1.0
            in_rows.append(row)
            in_rhs.append(gamma)

    return ThetaBlock(
        n_theta=S,
        n_aux=n_aux,
        A_eq=np.array(eq_rows),
        b_eq=np.array(eq_rhs),
        A_in=np.array(in_rows).reshape(len(in_rows), n),
        b_in=np.array(in_rhs),
    )


@dataclass(frozen=True)
class DualNormBlock:
    """
    Variables w encoding γ = gamma_map @ w and the penalty cost·w = Γ‖γ‖_*.

    `G` holds extra rows `G w ≥ 0` (only for the ∞-norm dual, i.e. a 1-norm ball).
    """

    lb: np.ndarray
    ub: np.ndarray
    gamma_map: np.ndarray
    cost: np.ndarray
    G: np.ndarray

    @property
    def n(self) -> int:
        return self.lb.size

    def gamma_of(self, w: np.ndarray) -> np.ndarray:
        return self.gamma_map @ w


def dual_norm_block(categorical: np.ndarray, norm: Norm, gamma: float) -> DualNormBlock:
    """
    Build the (γ, Γ‖γ‖_*) block for a ball of the given primal norm.

    ∞-ball → 1-norm dual: γ_j = γ⁺_j − γ⁻_j, cost Γ on each part.
    1-ball → ∞-norm dual: γ_j free, τ ≥ 0 with cost Γ and τ ± γ_j ≥ 0.
    Categorical components get a free, unpenalised γ_j.
    """
    d_x = categorical.size
    finite = not math.isinf(gamma)
    lb, maps, cost = [], [], []
    tau_links = []

    def add(j: int, sign: float, lower: float, c: float) -> int:
        col = np.zeros(d_x)
        if j >= 0:
            col[j] = sign
        maps.append(col)
        lb.append(lower)
        cost.append(c)
        return len(lb) - 1

    for j in range(d_x):
        if categorical[j]:
            add(j, 1.0, -np.inf, 0.0)
        elif not finite:
            continue
        elif norm is Norm.INF:
            add(j, 1.0, 0.0, gamma)
            add(j, -1.0, 0.0, gamma)
        else:
            tau_links.append(add(j, 1.0, -np.inf, 0.0))

    G = np.zeros((0, len(lb)))
    if tau_links:
        tau = add(-1, 0.0, 0.0, gamma)
        n = len(lb)
        rows = []
        for k in tau_links:
            for sign in (-1.0, 1.0):
                row = np.zeros(n)
                row[tau] = 1.0
                row[k] = sign
                rows.append(row)
        G = np.array(rows)

    n = len(lb)
    return DualNormBlock(
        lb=np.array(lb, dtype=float),
        ub=np.full(n, np.inf),
        gamma_map=np.array(maps).T.reshape(d_x, n),
        cost=np.array(cost, dtype=float),
        G=G.reshape(G.shape[0], n),
    )
