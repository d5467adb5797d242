# sdk/energy/dispatch.py
"""
Hour-ahead energy and reserve scheduling as a two-stage problem.

First stage z = (p, r_up, r_dn, f, β):

    G p + A f = D_t − E ȳ_t                      nodal balance at expected output
    f_l = b_l (β_from − β_to)                    DC flow, β_ref = 0
    p − r_dn ≥ P̲,   p + r_up ≤ P̄                generator limits
    p + r_up − p_prev ≤ R^up,  p_prev − p + r_dn ≤ R^dn    ramps (skipped without p_prev)
    −F̄ ≤ f ≤ F̄,  r ≥ 0

Recourse, for a renewable realization ỹ, over raw variables
(Δ free, s⁻ ∈ [0, D_t], s⁺ ≥ 0, f_wc ∈ [−F̄, F̄], β_wc free off the reference bus):

    G Δ + A f_wc − s⁺ + s⁻ = D_t − E ỹ − G p
    f_wc − b (β_wc,from − β_wc,to) = 0
    Δ ≤ r_up,   −Δ ≤ r_dn
    s⁺ ≤ E ỹ

at cost c·Δ + M⁻·Σs⁻ + M⁺·Σs⁺. The raw recourse is brought to standard form
by `to_standard_recourse`, so W and q do not depend on the period and every
stage of a run shares one cut-pool fingerprint.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from sdk.config.settings import logger
from sdk.core.exceptions import DimensionError
from sdk.core.models import FirstStage, ScenarioSet, TwoStageProblem, UncertaintyKind
from sdk.core.schema import ArrayModel
from sdk.core.standard_form import RawRecourse, RowSense, StandardRecourse, to_standard_recourse
from sdk.energy.network import NetworkInstance


@dataclass(frozen=True)
class StageLayout:
    """Column slices of the first stage and of the raw recourse variables."""

    p: slice
    r_up: slice
    r_dn: slice
    f: slice
    beta: slice
    delta: slice
    shed: slice
    spill: slice
    f_wc: slice
    beta_wc: slice

    @classmethod
    def of(cls, net: NetworkInstance) -> "StageLayout":
        n_g, n_l, n_b = net.n_gen, net.n_lines, net.buses
        first = np.cumsum([0, n_g, n_g, n_g, n_l, n_b])
        raw = np.cumsum([0, n_g, n_b, n_b, n_l, n_b - 1])
        s1 = [slice(int(first[k]), int(first[k + 1])) for k in range(5)]
        s2 = [slice(int(raw[k]), int(raw[k + 1])) for k in range(5)]
        return cls(*s1, *s2)

    @property
    def d_z(self) -> int:
        return self.beta.stop

    @property
    def n_raw(self) -> int:
        return self.beta_wc.stop


class PeriodSchedule(ArrayModel):
    """Committed first-stage decisions of one period, with its worst-case imbalance cost."""

    period: int
    p: np.ndarray
    r_up: np.ndarray
    r_dn: np.ndarray
    f: np.ndarray
    beta: np.ndarray
    alpha: float
    objective: float
    first_stage_cost: float
    status: str = "optimal"
    iterations: int = 0
    oracle_calls: int = 0
    pool_size: int = 0
    gamma0: Optional[float] = None
    gamma: Optional[float] = None
    scenarios: int = 0

    def z(self) -> np.ndarray:
        return np.concatenate([self.p, self.r_up, self.r_dn, self.f, self.beta])


@dataclass(frozen=True)
class EnergyStage:
    problem: TwoStageProblem
    layout: StageLayout
    recourse: StandardRecourse
    period: int


def first_stage(net: NetworkInstance, t: int, prev_p: Optional[np.ndarray]) -> FirstStage:
    """Polyhedron of admissible (p, r_up, r_dn, f, β) for period t."""
    L = StageLayout.of(net)
    n_g, n_l, n_b = net.n_gen, net.n_lines, net.buses
    d_z = L.d_z
    A = net.incidence()

    A_eq = np.zeros((n_b + n_l, d_z))
    b_eq = np.zeros(n_b + n_l)
    A_eq[:n_b, L.p] = net.gen_map()
    A_eq[:n_b, L.f] = A
    b_eq[:n_b] = net.demand_at(t) - net.ren_map() @ net.expected_at(t)
    for l, line in enumerate(net.lines):
        row = n_b + l
        A_eq[row, L.f.start + l] = 1.0
        A_eq[row, L.beta.start + line.from_bus] = -line.susceptance
        A_eq[row, L.beta.start + line.to_bus] = line.susceptance

    p_min, p_max = net.gen_array("p_min"), net.gen_array("p_max")
    rows, rhs = [], []
    for k in range(n_g):
        r = np.zeros(d_z)
        r[L.p.start + k], r[L.r_dn.start + k] = -1.0, 1.0
        rows.append(r)
        rhs.append(-p_min[k])
        r = np.zeros(d_z)
        r[L.p.start + k], r[L.r_up.start + k] = 1.0, 1.0
        rows.append(r)
        rhs.append(p_max[k])
    if prev_p is not None:
        prev_p = np.asarray(prev_p, dtype=float)
        if prev_p.size != n_g:
            raise DimensionError(f"prev_p has length {prev_p.size}, network has {n_g} generators")
        ramp_up, ramp_dn = net.gen_array("ramp_up"), net.gen_array("ramp_dn")
        for k in range(n_g):
            r = np.zeros(d_z)
            r[L.p.start + k], r[L.r_up.start + k] = 1.0, 1.0
            rows.append(r)
            rhs.append(ramp_up[k] + prev_p[k])
            r = np.zeros(d_z)
            r[L.p.start + k], r[L.r_dn.start + k] = -1.0, 1.0
            rows.append(r)
            rhs.append(ramp_dn[k] - prev_p[k])

    cap = np.array([line.capacity for line in net.lines], dtype=float)
    lb = np.zeros(d_z)
    ub = np.full(d_z, np.inf)
    lb[L.f], ub[L.f] = -cap, cap
    lb[L.beta], ub[L.beta] = -np.inf, np.inf
    lb[L.beta.start + net.reference_bus] = 0.0
    ub[L.beta.start + net.reference_bus] = 0.0
    return FirstStage(
        A_eq=A_eq,
        b_eq=b_eq,
        A_in=np.array(rows).reshape(len(rows), d_z),
        b_in=rhs,
        lb=lb.tolist(),
        ub=ub.tolist(),
    )


def first_stage_cost(net: NetworkInstance) -> np.ndarray:
    L = StageLayout.of(net)
    c = np.zeros(L.d_z)
    c[L.p] = net.gen_array("cost")
    c[L.r_up] = net.gen_array("cost_up")
    c[L.r_dn] = net.gen_array("cost_dn")
    return c


def raw_recourse(net: NetworkInstance, t: int) -> RawRecourse:
    """Mixed-sense recourse LP of period t (bounds on shedding follow D_t)."""
    L = StageLayout.of(net)
    n_g, n_l, n_b = net.n_gen, net.n_lines, net.buses
    n = L.n_raw
    non_ref = [b for b in range(n_b) if b != net.reference_bus]

    m = 3 * n_b + n_l + 2 * n_g
    A = np.zeros((m, n))
    senses = []
    # balance
    A[:n_b, L.delta] = net.gen_map()
    A[:n_b, L.f_wc] = net.incidence()
    A[:n_b, L.spill] = -np.eye(n_b)
    A[:n_b, L.shed] = np.eye(n_b)
    senses += [RowSense.EQ] * n_b
    # flow
    for l, line in enumerate(net.lines):
        row = n_b + l
        A[row, L.f_wc.start + l] = 1.0
        for bus, sign in ((line.from_bus, -1.0), (line.to_bus, 1.0)):
            if bus != net.reference_bus:
                A[row, L.beta_wc.start + non_ref.index(bus)] = sign * line.susceptance
    senses += [RowSense.EQ] * n_l
    # reserve deployment
    base = n_b + n_l
    A[base:base + n_g, L.delta] = np.eye(n_g)
    A[base + n_g:base + 2 * n_g, L.delta] = -np.eye(n_g)
    senses += [RowSense.LE] * (2 * n_g)
    # spillage cap
    base += 2 * n_g
    A[base:base + n_b, L.spill] = np.eye(n_b)
    senses += [RowSense.LE] * n_b

    q = np.zeros(n)
    q[L.delta] = net.gen_array("cost")
    q[L.shed] = net.M_shed
    q[L.spill] = net.M_spill

    cap = np.array([line.capacity for line in net.lines], dtype=float)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    lb[L.delta] = -np.inf
    ub[L.shed] = net.demand_at(t)
    lb[L.f_wc], ub[L.f_wc] = -cap, cap
    lb[L.beta_wc] = -np.inf
    return RawRecourse(q=q, A=A, senses=tuple(senses), lb=lb.tolist(), ub=ub.tolist())


def raw_rhs(net: NetworkInstance, t: int, y: np.ndarray) -> np.ndarray:
    """h_raw(ỹ) = (D_t − Eỹ, 0, 0, 0, Eỹ)."""
    Ey = net.ren_map() @ np.asarray(y, dtype=float)
    n_b, n_l, n_g = net.buses, net.n_lines, net.n_gen
    return np.concatenate([net.demand_at(t) - Ey, np.zeros(n_l + 2 * n_g), Ey])


def raw_technology(net: NetworkInstance) -> np.ndarray:
    """T_raw: G on p in the balance rows, −I on r_up / r_dn in the reserve rows."""
    L = StageLayout.of(net)
    n_g, n_l, n_b = net.n_gen, net.n_lines, net.buses
    T = np.zeros((3 * n_b + n_l + 2 * n_g, L.d_z))
    T[:n_b, L.p] = net.gen_map()
    base = n_b + n_l
    T[base:base + n_g, L.r_up] = -np.eye(n_g)
    T[base + n_g:base + 2 * n_g, L.r_dn] = -np.eye(n_g)
    return T


def build_stage(net: NetworkInstance, t: int, prev_p: Optional[np.ndarray], window: ScenarioSet) -> EnergyStage:
    """
    Stage problem of period t.

    Args:
        net (NetworkInstance): Network and demand data.
        t (int): Period index into `net.demand` / `net.expected_output`.
        prev_p (np.ndarray, optional): Previous dispatch; None drops the ramp rows.
        window (ScenarioSet): Contexts `x` paired with renewable outputs carried
            in `window.h` (one length-n_r vector per scenario).

    Returns:
        EnergyStage: the TwoStageProblem plus the maps needed to read it back.
    """
    if not 0 <= t < net.n_periods:
        raise DimensionError(f"period {t} out of range 0..{net.n_periods - 1}")
    if window.h is None or any(y.size != net.n_ren for y in window.h):
        raise DimensionError(f"window must carry renewable outputs of length {net.n_ren} in h")
    layout = StageLayout.of(net)
    std = to_standard_recourse(raw_recourse(net, t))
    h = [std.transform_h(raw_rhs(net, t, y)) for y in window.h]
    scenarios = ScenarioSet(x=window.x, h=h, categorical_mask=window.categorical_mask)
    problem = TwoStageProblem(
        c=first_stage_cost(net),
        Z=first_stage(net, t, prev_p),
        q=std.q,
        W=std.W,
        scenarios=scenarios,
        uncertainty_kind=UncertaintyKind.RHS_H_ONLY,
        T=std.transform_T(raw_technology(net)),
    )
    logger.debug(f"[build_stage] t={t} d_z={problem.d_z} d_u={problem.d_u} d_h={problem.d_h} S={scenarios.S}")
    return EnergyStage(problem=problem, layout=layout, recourse=std, period=t)


def build_stage_problem(net: NetworkInstance, t: int, prev_p: Optional[np.ndarray], window: ScenarioSet) -> TwoStageProblem:
    return build_stage(net, t, prev_p, window).problem


def schedule_from_z(stage: EnergyStage, z: np.ndarray, net: NetworkInstance, **fields) -> PeriodSchedule:
    L = stage.layout
    z = np.asarray(z, dtype=float)
    return PeriodSchedule(
        period=stage.period,
        p=z[L.p],
        r_up=z[L.r_up],
        r_dn=z[L.r_dn],
        f=z[L.f],
        beta=z[L.beta],
        first_stage_cost=float(first_stage_cost(net) @ z),
        **fields,
    )
