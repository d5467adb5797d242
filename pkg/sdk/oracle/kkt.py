# sdk/oracle/kkt.py
"""
Single-level reformulation of  max_o [ outer_cost·o + min_w { f·w : inner rows } ]
by the inner problem's KKT conditions with big-M complementarity.

Inner problem (parametrised by the outer variables o):

    min  f·w
    s.t. G w ≥ g0 + H o        (multipliers λ ≥ 0)
         E w = e0 + K o        (multipliers ν free)
         w_j ≥ 0 for j in the nonnegative mask (reduced costs μ_j ≥ 0)

Variable order of the resulting mixed-binary program:

    [ o | w | λ | ν | μ | b | c ]

with one binary b_i per inequality row and one binary c_j per nonnegative
inner variable:

    slack_i ≤ M_s,i · b_i        λ_i ≤ M_d,i · (1 − b_i)
    w_j     ≤ M_v,j · c_j        μ_j ≤ M_r,j · (1 − c_j)
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from sdk.core.exceptions import DimensionError
from sdk.solver.lp_solver import LinearProgram
from sdk.solver.milp_solver import MixedBinaryProgram


@dataclass(frozen=True)
class OuterBlock:
    cost: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_in: np.ndarray
    b_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @property
    def n(self) -> int:
        return self.cost.size


@dataclass(frozen=True)
class InnerBlock:
    f: np.ndarray
    G: np.ndarray
    g0: np.ndarray
    H: np.ndarray
    E: np.ndarray
    e0: np.ndarray
    K: np.ndarray
    nonneg: np.ndarray

    @property
    def n(self) -> int:
        return self.f.size


@dataclass(frozen=True)
class BigM:
    slack: np.ndarray
    dual: np.ndarray
    var: np.ndarray
    reduced: np.ndarray
    watch_duals: bool = False
    """Also treat λ/μ near their bound as a sign of a too-small M (heuristic dual bounds)."""

    def scaled(self, factor: float) -> "BigM":
        return BigM(self.slack * factor, self.dual * factor, self.var * factor, self.reduced * factor, self.watch_duals)


@dataclass(frozen=True)
class KktProgram:
    program: MixedBinaryProgram
    outer: OuterBlock
    inner: InnerBlock
    big_m: BigM
    slices: Tuple[slice, ...]

    def split(self, x: np.ndarray):
        """(o, w, λ, ν, μ, b, c) views of a primal vector."""
        return tuple(x[s] for s in self.slices)

    def slack(self, x: np.ndarray) -> np.ndarray:
        o, w = self.split(x)[:2]
        inner = self.inner
        return inner.G @ w - inner.g0 - inner.H @ o

    def near_big_m(self, x: np.ndarray, ratio: float = 0.99) -> bool:
        """True if a primal quantity (or a watched dual) sits within 1% of its M."""
        _, w, lam, _, mu, _, _ = self.split(x)
        nn = np.flatnonzero(self.inner.nonneg)
        checks = [(self.slack(x), self.big_m.slack), (w[nn], self.big_m.var)]
        if self.big_m.watch_duals:
            checks += [(lam, self.big_m.dual), (mu, self.big_m.reduced)]
        for value, bound in checks:
            active = bound > 0
            if np.any(value[active] >= ratio * bound[active]):
                return True
        return False

    def complementarity_violations(self, x: np.ndarray, tol: float) -> List[Tuple[str, int, float]]:
        """Pairs with a·b > tol·(1 + a + b), as (kind, index, product)."""
        _, w, lam, _, mu, _, _ = self.split(x)
        nn = np.flatnonzero(self.inner.nonneg)
        out = []
        for kind, a, b in (("row", np.maximum(self.slack(x), 0.0), lam), ("var", np.maximum(w[nn], 0.0), mu)):
            prod = a * b
            bad = np.flatnonzero(prod > tol * (1.0 + a + b))
            out.extend((kind, int(i), float(prod[i])) for i in bad)
        return out


def build_kkt_program(outer: OuterBlock, inner: InnerBlock, big_m: BigM) -> KktProgram:
    """
    Assemble the maximisation MILP of the bilevel problem.

    Raises:
        DimensionError: If the blocks or big-M vectors do not conform.
    """
    n_o, n_w = outer.n, inner.n
    m_g, m_e = inner.G.shape[0], inner.E.shape[0]
    nn = np.flatnonzero(inner.nonneg)
    n_nn = nn.size
    if inner.H.shape != (m_g, n_o) or inner.K.shape != (m_e, n_o):
        raise DimensionError(f"[build_kkt_program] H {inner.H.shape} / K {inner.K.shape} do not match {n_o} outer variables")
    if big_m.slack.size != m_g or big_m.dual.size != m_g or big_m.var.size != n_nn or big_m.reduced.size != n_nn:
        raise DimensionError("[build_kkt_program] big-M vectors do not match the inner block")

    sizes = [n_o, n_w, m_g, m_e, n_nn, m_g, n_nn]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    slices = tuple(slice(int(offsets[k]), int(offsets[k + 1])) for k in range(len(sizes)))
    so, sw, sl, sn, sm, sb, sc = slices
    N = int(offsets[-1])

    def row() -> np.ndarray:
        return np.zeros(N)

    eq_rows, eq_rhs, in_rows, in_rhs = [], [], [], []

    # Outer feasibility
    for i in range(outer.A_eq.shape[0]):
        r = row()
        r[so] = outer.A_eq[i]
        eq_rows.append(r)
        eq_rhs.append(outer.b_eq[i])
    for i in range(outer.A_in.shape[0]):
        r = row()
        r[so] = outer.A_in[i]
        in_rows.append(r)
        in_rhs.append(outer.b_in[i])

    # Inner primal feasibility
    for i in range(m_g):
        r = row()
        r[sw] = -inner.G[i]
        r[so] = inner.H[i]
        in_rows.append(r)
        in_rhs.append(-inner.g0[i])
    for i in range(m_e):
        r = row()
        r[sw] = inner.E[i]
        r[so] = -inner.K[i]
        eq_rows.append(r)
        eq_rhs.append(inner.e0[i])

    # Stationarity: Gᵀλ + Eᵀν + μ = f
    for j in range(n_w):
        r = row()
        r[sl] = inner.G[:, j]
        r[sn] = inner.E[:, j]
        k = np.flatnonzero(nn == j)
        if k.size:
            r[sm.start + int(k[0])] = 1.0
        eq_rows.append(r)
        eq_rhs.append(inner.f[j])

    # Row complementarity
    for i in range(m_g):
        r = row()
        r[sw] = inner.G[i]
        r[so] = -inner.H[i]
        r[sb.start + i] = -big_m.slack[i]
        in_rows.append(r)
        in_rhs.append(inner.g0[i])
        r = row()
        r[sl.start + i] = 1.0
        r[sb.start + i] = big_m.dual[i]
        in_rows.append(r)
        in_rhs.append(big_m.dual[i])

    # Variable complementarity
    for k, j in enumerate(nn):
        r = row()
        r[sw.start + j] = 1.0
        r[sc.start + k] = -big_m.var[k]
        in_rows.append(r)
        in_rhs.append(0.0)
        r = row()
        r[sm.start + k] = 1.0
        r[sc.start + k] = big_m.reduced[k]
        in_rows.append(r)
        in_rhs.append(big_m.reduced[k])

    lb = np.zeros(N)
    ub = np.full(N, np.inf)
    lb[so], ub[so] = outer.lb, outer.ub
    lb[sw] = np.where(inner.nonneg, 0.0, -np.inf)
    lb[sn] = -np.inf
    ub[sb] = 1.0
    ub[sc] = 1.0

    c = row()
    c[so] = outer.cost
    c[sw] = inner.f

    lp = LinearProgram.build(
        c,
        A_eq=np.array(eq_rows).reshape(len(eq_rows), N),
        b_eq=eq_rhs,
        A_in=np.array(in_rows).reshape(len(in_rows), N),
        b_in=in_rhs,
        lb=lb,
        ub=ub,
    )
    binaries = tuple(range(sb.start, sc.stop))
    return KktProgram(
        program=MixedBinaryProgram(lp=lp, binaries=binaries, sense="max"),
        outer=outer,
        inner=inner,
        big_m=big_m,
        slices=slices,
    )
