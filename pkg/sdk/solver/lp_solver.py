# sdk/solver/lp_solver.py
"""
Dense tableau primal simplex.

Problems are stated as

    min  c·x
    s.t. A_eq x  = b_eq
         A_in x <= b_in
         lb <= x <= ub        (lb may be -inf, ub may be +inf)

and rewritten internally into `A' x' = b', x' >= 0` by shifting, reflecting or
splitting each variable according to which of its bounds are finite. Finite
double bounds become extra `<=` rows. Phase I minimises the sum of artificial
variables; Phase II the true objective. Pricing is Dantzig's rule until
5·(rows+cols) degenerate pivots have been made, then Bland's rule.

Dual sign convention (minimisation): `y_eq` is free, `y_in <= 0`, and
`reduced_costs = c - A_eqᵀ y_eq - A_inᵀ y_in`.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from sdk.config.settings import settings, logger
from sdk.core.exceptions import DimensionError, LpStalledError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _matrix(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else np.zeros((0, n))
    return arr


def _vector(v, m: int) -> np.ndarray:
    if v is None:
        return np.zeros(m)
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_in: np.ndarray
    b_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @classmethod
    def build(
        cls,
        c,
        A_eq=None,
        b_eq=None,
        A_in=None,
        b_in=None,
        lb=None,
        ub=None,
    ) -> "LinearProgram":
        """
        Assemble a LinearProgram from array-likes, filling omitted blocks.

        Missing bounds default to `0 <= x < +inf`.
        """
        c = np.asarray(c, dtype=float).reshape(-1)
        n = c.size
        A_eq = _matrix(A_eq, n)
        A_in = _matrix(A_in, n)
        lp = cls(
            c=c,
            A_eq=A_eq,
            b_eq=_vector(b_eq, A_eq.shape[0]),
            A_in=A_in,
            b_in=_vector(b_in, A_in.shape[0]),
            lb=np.zeros(n) if lb is None else np.asarray(lb, dtype=float).reshape(-1),
            ub=np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).reshape(-1),
        )
        lp.validate()
        return lp

    @property
    def n(self) -> int:
        return self.c.size

    def validate(self) -> None:
        n = self.n
        if self.A_eq.shape != (self.b_eq.size, n) or self.A_in.shape != (self.b_in.size, n):
            raise DimensionError(
                f"[LinearProgram] row blocks {self.A_eq.shape}/{self.A_in.shape} do not match "
                f"{n} variables and rhs sizes {self.b_eq.size}/{self.b_in.size}"
            )
        if self.lb.size != n or self.ub.size != n:
            raise DimensionError(f"[LinearProgram] bound vectors must have length {n}")
        for name in ("c", "A_eq", "b_eq", "A_in", "b_in"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DimensionError(f"[LinearProgram] non-finite coefficient in {name}")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)):
            raise DimensionError("[LinearProgram] NaN bound")
        if np.any(self.lb == np.inf) or np.any(self.ub == -np.inf):
            raise DimensionError("[LinearProgram] lower bound +inf or upper bound -inf")

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "LinearProgram":
        return LinearProgram(self.c, self.A_eq, self.b_eq, self.A_in, self.b_in, lb, ub)

    def with_objective(self, c: np.ndarray) -> "LinearProgram":
        return LinearProgram(np.asarray(c, dtype=float), self.A_eq, self.b_eq, self.A_in, self.b_in, self.lb, self.ub)


@dataclass(frozen=True)
class LpSolution:
    status: str
    primal: Optional[np.ndarray] = None
    objective: float = float("nan")
    dual_eq: Optional[np.ndarray] = None
    dual_in: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    dual_objective: float = float("nan")
    farkas: Optional[np.ndarray] = None
    """Infeasible: y over [eq rows, in rows, finite-box rows] of the shifted system,
    y_in >= 0, yᵀA >= 0 on every column and yᵀb < 0."""
    ray: Optional[np.ndarray] = None
    """Unbounded: direction d in x-space with c·d < 0 keeping every row feasible."""
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _StandardForm:
    """Bookkeeping of the rewrite x = shift + M x' with x' >= 0."""

    A: np.ndarray
    b: np.ndarray
    cost: np.ndarray
    sign: np.ndarray
    n_struct: int
    shift: np.ndarray
    M: np.ndarray
    n_eq: int
    n_in: int
    slack_rows: List[int] = field(default_factory=list)


def _standardize(lp: LinearProgram) -> _StandardForm:
    n = lp.n
    cols: List[Tuple[int, float]] = []
    shift = np.zeros(n)
    box_rows: List[Tuple[int, float]] = []
    for j in range(n):
        lo, hi = lp.lb[j], lp.ub[j]
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                box_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))

    n_struct = len(cols)
    M = np.zeros((n, n_struct))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s

    n_eq, n_in, n_box = lp.A_eq.shape[0], lp.A_in.shape[0], len(box_rows)
    m = n_eq + n_in + n_box
    n_slack = n_in + n_box
    A = np.zeros((m, n_struct + n_slack))
    b = np.zeros(m)
    A[:n_eq, :n_struct] = lp.A_eq @ M
    b[:n_eq] = lp.b_eq - lp.A_eq @ shift
    A[n_eq:n_eq + n_in, :n_struct] = lp.A_in @ M
    b[n_eq:n_eq + n_in] = lp.b_in - lp.A_in @ shift
    for r, (k, width) in enumerate(box_rows):
        A[n_eq + n_in + r, k] = 1.0
        b[n_eq + n_in + r] = width
    slack_rows = list(range(n_eq, m))
    for k, r in enumerate(slack_rows):
        A[r, n_struct + k] = 1.0

    sign = np.where(b < 0.0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    cost = np.zeros(n_struct + n_slack)
    cost[:n_struct] = M.T @ lp.c
    return _StandardForm(A, b, cost, sign, n_struct, shift, M, n_eq, n_in, slack_rows)


class _Tableau:
    """Row-reduced tableau [B⁻¹A | B⁻¹b] with its basis, pivoting in place."""

    def __init__(self, T: np.ndarray, basis: List[int], trace: Optional[str]) -> None:
        self.T = T
        self.basis = basis
        self.trace = trace
        self.pivots = 0
        self.degenerate = 0
        self.kept_rows = list(range(T.shape[0]))

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        column = T[:, col].copy()
        column[row] = 0.0
        T -= np.outer(column, T[row])
        self.basis[row] = col
        self.pivots += 1
        if self.trace:
            self._dump()

    def _dump(self) -> None:
        with open(self.trace, "a", encoding="utf-8") as fh:
            fh.write(f"# pivot {self.pivots} basis {' '.join(str(b) for b in self.basis)}\n")
            np.savetxt(fh, self.T, delimiter=",", fmt="%.12g")

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_pivots: int) -> Tuple[str, int]:
        """
        Iterate until optimal or unbounded for the given cost vector.

        Returns:
            (status, entering column) where the column is meaningful only when
            the status is UNBOUNDED.
        """
        T = self.T
        m = T.shape[0]
        ncols = T.shape[1] - 1
        bland_after = 5 * (m + ncols)
        dj_tol = settings.PIVOT_TOL
        while True:
            if self.pivots >= max_pivots:
                raise LpStalledError(
                    f"[solve_lp] simplex stalled after {self.pivots} pivots",
                    {"pivots": self.pivots},
                )
            reduced = cost[:ncols] - cost[self.basis] @ T[:, :ncols] if m else cost[:ncols].copy()
            candidates = np.flatnonzero(allowed & (reduced < -dj_tol))
            if candidates.size == 0:
                return OPTIMAL, -1
            if self.degenerate >= bland_after:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(reduced[candidates])])
            if m == 0:
                return UNBOUNDED, col
            column = T[:, col]
            rows = np.flatnonzero(column > settings.PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED, col
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            row = int(min(tied, key=lambda r: self.basis[r]))
            if best <= settings.FEAS_TOL:
                self.degenerate += 1
            self.pivot(row, col)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """
    Solve a linear program with the two-phase primal simplex method.

    Args:
        lp (LinearProgram): The problem (minimisation).

    Returns:
        LpSolution: status plus primal/dual data on `optimal`, a Farkas vector on
        `infeasible`, or an improving ray on `unbounded`.

    Raises:
        LpStalledError: If the pivot cap is exceeded.
    """
    lp.validate()
    sf = _standardize(lp)
    m, ncols = sf.A.shape

    # 1) Initial basis: positive slacks where available, artificials elsewhere.
    basis: List[int] = [-1] * m
    for k, r in enumerate(sf.slack_rows):
        if sf.sign[r] > 0:
            basis[r] = sf.n_struct + k
    art_rows = [r for r in range(m) if basis[r] < 0]
    n_art = len(art_rows)
    T = np.zeros((m, ncols + n_art + 1))
    T[:, :ncols] = sf.A
    T[:, -1] = sf.b
    for k, r in enumerate(art_rows):
        T[r, ncols + k] = 1.0
        basis[r] = ncols + k
    tab = _Tableau(T, basis, settings.LP_TRACE)
    max_pivots = 50 * (m + ncols + n_art) + 1000

    # 2) Phase I.
    if n_art:
        cost1 = np.zeros(ncols + n_art)
        cost1[ncols:] = 1.0
        tab.run(cost1, np.ones(ncols + n_art, dtype=bool), max_pivots)
        infeasibility = float(cost1[tab.basis] @ tab.T[:, -1])
        if infeasibility > settings.PHASE1_TOL:
            full = np.hstack([sf.A, np.eye(m)[:, art_rows]])
            y1 = _basis_duals(full, tab.basis, cost1)
            farkas = -sf.sign * y1 if y1 is not None else None
            logger.debug(f"[solve_lp] infeasible, phase-I residual {infeasibility:.3e}")
            return LpSolution(status=INFEASIBLE, farkas=farkas, pivots=tab.pivots)
        _drive_out_artificials(tab, ncols)

    if n_art:
        tab.T = np.delete(tab.T, np.s_[ncols:ncols + n_art], axis=1)

    # 3) Phase II.
    status, entering = tab.run(sf.cost, np.ones(ncols, dtype=bool), max_pivots)
    if status == UNBOUNDED:
        direction = np.zeros(ncols)
        direction[entering] = 1.0
        for i, bvar in enumerate(tab.basis):
            direction[bvar] = -tab.T[i, entering]
        ray = sf.M @ direction[: sf.n_struct]
        return LpSolution(status=UNBOUNDED, ray=ray, pivots=tab.pivots)

    return _optimal_solution(lp, sf, tab, tab.kept_rows)


def _basis_duals(A: np.ndarray, basis: List[int], cost: np.ndarray) -> Optional[np.ndarray]:
    if not basis:
        return np.zeros(0)
    try:
        return np.linalg.solve(A[:, basis].T, cost[basis])
    except np.linalg.LinAlgError:
        return None


def _drive_out_artificials(tab: _Tableau, ncols: int) -> None:
    """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
    redundant = []
    for r in range(tab.T.shape[0]):
        if tab.basis[r] < ncols:
            continue
        candidates = np.flatnonzero(np.abs(tab.T[r, :ncols]) > settings.PIVOT_TOL * 10)
        if candidates.size:
            tab.pivot(r, int(candidates[0]))
        else:
            redundant.append(r)
    kept = [r for r in range(tab.T.shape[0]) if r not in redundant]
    if redundant:
        logger.debug(f"[solve_lp] dropping {len(redundant)} redundant row(s)")
        tab.T = tab.T[kept]
        tab.basis = [tab.basis[r] for r in kept]
    tab.kept_rows = kept


def _optimal_solution(lp: LinearProgram, sf: _StandardForm, tab: _Tableau, kept: List[int]) -> LpSolution:
    m_std, ncols = sf.A.shape
    basis = tab.basis
    A_kept = sf.A[kept]
    b_kept = sf.b[kept]

    # Recompute the basic solution from the original data to shed tableau drift.
    xs = np.zeros(ncols)
    try:
        xs[basis] = np.linalg.solve(A_kept[:, basis], b_kept) if basis else []
    except np.linalg.LinAlgError:
        xs[basis] = tab.T[:, -1]
    xs[np.abs(xs) < 1e-13] = 0.0
    xs = np.maximum(xs, 0.0)

    y_kept = _basis_duals(A_kept, basis, sf.cost)
    if y_kept is None:
        y_kept = np.zeros(len(kept))
    y_std = np.zeros(m_std)
    y_std[kept] = y_kept
    y_rows = sf.sign * y_std

    x = sf.shift + sf.M @ xs[: sf.n_struct]
    y_eq = y_rows[: sf.n_eq]
    y_in = y_rows[sf.n_eq: sf.n_eq + sf.n_in]
    wrong_sign = float(np.max(y_in, initial=0.0))
    if wrong_sign > settings.FEAS_TOL:
        logger.debug(f"[solve_lp] clipping inequality duals of the wrong sign (max {wrong_sign:.3e})")
    y_in = np.minimum(y_in, 0.0)
    reduced = lp.c - lp.A_eq.T @ y_eq - lp.A_in.T @ y_in
    objective = float(lp.c @ x)

    dual_objective = float(lp.b_eq @ y_eq + lp.b_in @ y_in)
    for j in range(lp.n):
        r = reduced[j]
        if r > 0 and np.isfinite(lp.lb[j]):
            dual_objective += r * lp.lb[j]
        elif r < 0 and np.isfinite(lp.ub[j]):
            dual_objective += r * lp.ub[j]

    return LpSolution(
        status=OPTIMAL,
        primal=x,
        objective=objective,
        dual_eq=y_eq,
        dual_in=y_in,
        reduced_costs=reduced,
        dual_objective=dual_objective,
        pivots=tab.pivots,
    )
