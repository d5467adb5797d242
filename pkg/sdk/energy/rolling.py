# sdk/energy/rolling.py
"""
Rolling-window online protocol.

Period t of the network is hour τ = window_len + t of the history. Its
scenario set is the trailing window [τ − window_len, τ) and each observation r
of the window is paired with the context it would have had when it was
forecast: the previous hour's renewable outputs y_{r−1} (continuous) and the
hour of day r mod 24 (categorical). Hour 0 has no lag and never enters a window.
"""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from sdk.config.settings import settings, logger
from sdk.core.exceptions import DdcroError, DimensionError, EmptySetError, InfeasibleError, InputError, NotFoundError
from sdk.core.models import ContextQuery, MasterKind, Norm, ScenarioSet
from sdk.ccg.algorithm import INFEASIBLE, CcgOptions, solve_ccg, warm_start_solve
from sdk.ccg.cut_pool import CutPool
from sdk.energy.dispatch import PeriodSchedule, build_stage, schedule_from_z
from sdk.energy.network import NetworkInstance

HOURS_PER_DAY = 24


class ContextMode(str, Enum):
    """Covariates used to condition the set."""

    AR1_DUMMY = "ar1_dummy"
    AR1 = "ar1"
    DUMMY = "dummy"
    UNCONDITIONAL = "unconditional"

    @property
    def uses_lag(self) -> bool:
        return self in (ContextMode.AR1_DUMMY, ContextMode.AR1)

    @property
    def uses_hour(self) -> bool:
        return self in (ContextMode.AR1_DUMMY, ContextMode.DUMMY)


@dataclass
class RollingRunResult:
    schedules: List[PeriodSchedule]
    pool: Optional[CutPool]
    oracle_calls: List[int] = field(default_factory=list)
    pool_sizes: List[int] = field(default_factory=list)

    @property
    def total_objective(self) -> float:
        return float(sum(s.objective for s in self.schedules))

    @property
    def total_oracle_calls(self) -> int:
        return int(sum(self.oracle_calls))


def load_series(path: str, n_cols: Optional[int] = None) -> np.ndarray:
    """
    Read an hourly CSV (header row, one column per renewable unit, MW).

    Raises:
        NotFoundError: If the file does not exist.
        InputError: On non-numeric cells or a column count other than `n_cols`.
    """
    if not os.path.isfile(path):
        raise NotFoundError(f"file not found: {path}", {"path": str(path)})
    try:
        frame = pd.read_csv(path)
        values = frame.to_numpy(dtype=float)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InputError(f"{path}: unreadable series ({exc})", {"path": str(path)}) from None
    if np.isnan(values).any():
        raise InputError(f"{path}: missing values in series", {"path": str(path)})
    if n_cols is not None and values.shape[1] != n_cols:
        raise DimensionError(f"{path}: {values.shape[1]} columns, network has {n_cols} renewables")
    return values


def hour_context(history: np.ndarray, row: int, mode: ContextMode) -> Tuple[np.ndarray, np.ndarray]:
    """Context of history row `row` and its categorical mask."""
    parts, mask = [], []
    if mode.uses_lag:
        lag = np.asarray(history[row - 1], dtype=float)
        parts.append(lag)
        mask += [False] * lag.size
    if mode.uses_hour:
        onehot = np.zeros(HOURS_PER_DAY)
        onehot[row % HOURS_PER_DAY] = 1.0
        parts.append(onehot)
        mask += [True] * HOURS_PER_DAY
    x = np.concatenate(parts) if parts else np.zeros(0)
    return x, np.array(mask, dtype=bool)


def window_scenarios(history: np.ndarray, tau: int, window_len: int, mode: ContextMode) -> Tuple[ScenarioSet, np.ndarray]:
    """
    Scenario window and context of hour τ.

    Matching-hour restriction is applied here: when the hour dummy is part of
    the context only observations of the same hour of day are kept and the
    dummy columns are dropped, leaving the continuous lag block.

    Raises:
        EmptySetError: If no observation of the window shares the hour of τ.
    """
    rows = [r for r in range(tau - window_len, tau) if r >= 1]
    if mode.uses_hour:
        rows = [r for r in rows if r % HOURS_PER_DAY == tau % HOURS_PER_DAY]
        if not rows:
            raise EmptySetError(f"no observation of hour {tau % HOURS_PER_DAY} in the window ending at {tau}", float("inf"))
    x, mask = hour_context(history, tau, mode)
    X = np.array([hour_context(history, r, mode)[0] for r in rows]).reshape(len(rows), x.size)
    keep = ~mask
    scenarios = ScenarioSet(
        x=X[:, keep],
        h=[np.asarray(history[r], dtype=float) for r in rows],
    )
    return scenarios, x[keep]


def rolling_run(
    net: NetworkInstance,
    history: np.ndarray,
    window_len: int,
    delta: Optional[float] = None,
    opts: Optional[CcgOptions] = None,
    mode: ContextMode = ContextMode.AR1_DUMMY,
    horizon: Optional[int] = None,
    norm: Norm = Norm.INF,
    warm: bool = True,
    pool: Optional[CutPool] = None,
) -> RollingRunResult:
    """
    Schedule `horizon` consecutive periods, threading prev_p and the cut pool.

    Args:
        net (NetworkInstance): Network with one demand row per period.
        history (np.ndarray): Hourly renewable outputs, hours × renewables.
        window_len (int): Number of trailing hours forming each scenario set.
        delta (float, optional): Γ = (1+δ)Γ₀; defaults to settings.DELTA.
        opts (CcgOptions, optional): Solver options; master must be contextual to warm start.
        mode (ContextMode): Conditioning covariates; `unconditional` uses Γ = ∞.
        horizon (int, optional): Periods to schedule; defaults to every network period.
        warm (bool): Carry the cut pool from one period to the next.
        pool (CutPool, optional): Pool to start from.

    Raises:
        InputError: If the history is too short for the horizon.
        DdcroError: Any solver error, with `period` added to its details.
    """
    opts = opts or CcgOptions()
    delta = settings.DELTA if delta is None else delta
    horizon = net.n_periods if horizon is None else horizon
    history = np.asarray(history, dtype=float)
    if history.ndim != 2 or history.shape[1] != net.n_ren:
        raise DimensionError(f"history must be hours × {net.n_ren}, got shape {history.shape}")
    if window_len < 1:
        raise InputError(f"window_len must be positive, got {window_len}")
    if horizon > net.n_periods:
        raise InputError(f"horizon {horizon} exceeds the {net.n_periods} demand periods of the network")
    if history.shape[0] < window_len + horizon:
        raise InputError(
            f"history has {history.shape[0]} hours, need window_len + horizon = {window_len + horizon}"
        )
    warm = warm and opts.master_kind is MasterKind.CONTEXTUAL

    schedules: List[PeriodSchedule] = []
    calls: List[int] = []
    sizes: List[int] = []
    prev_p = None
    carried = pool if warm else None

    for t in range(horizon):
        tau = window_len + t
        try:
            window, x = window_scenarios(history, tau, window_len, mode)
            stage = build_stage(net, t, prev_p, window)
            if mode is ContextMode.UNCONDITIONAL:
                query = ContextQuery(x=x, norm=norm, gamma=float("inf"))
            else:
                query = ContextQuery(x=x, norm=norm, delta=delta)
            if carried is not None:
                sol, found = warm_start_solve(stage.problem, query, carried, opts)
            else:
                sol, found = solve_ccg(stage.problem, query, opts)
            if sol.status == INFEASIBLE:
                raise InfeasibleError(f"stage problem of period {t} has no feasible dispatch")
        except DdcroError as exc:
            exc.details.setdefault("period", t)
            logger.error(f"[rolling_run] period {t}: {exc.message}")
            raise
        if warm:
            carried = found
        size = len(found)
        schedule = schedule_from_z(
            stage,
            sol.z,
            net,
            alpha=sol.alpha,
            objective=sol.objective,
            status=sol.status,
            iterations=sol.iterations,
            oracle_calls=sol.oracle_calls,
            pool_size=size,
            gamma0=sol.gamma0,
            gamma=sol.gamma,
            scenarios=window.S,
        )
        schedules.append(schedule)
        calls.append(sol.oracle_calls)
        sizes.append(size)
        prev_p = schedule.p
        logger.info(
            f"[rolling_run] t={t} S={window.S} objective={sol.objective:.6f} oracle_calls={sol.oracle_calls} pool={size}"
        )

    return RollingRunResult(schedules=schedules, pool=carried, oracle_calls=calls, pool_sizes=sizes)


def schedules_frame(schedules: List[PeriodSchedule]) -> pd.DataFrame:
    """One row per period; vector fields are expanded into indexed columns."""
    records = []
    for s in schedules:
        row = {"period": s.period, "objective": s.objective, "alpha": s.alpha, "first_stage_cost": s.first_stage_cost}
        for name in ("p", "r_up", "r_dn", "f", "beta"):
            for k, v in enumerate(getattr(s, name)):
                row[f"{name}_{k}"] = float(v)
        row.update(
            status=s.status,
            iterations=s.iterations,
            oracle_calls=s.oracle_calls,
            pool_size=s.pool_size,
            gamma0=s.gamma0,
            gamma=s.gamma,
            scenarios=s.scenarios,
        )
        records.append(row)
    return pd.DataFrame.from_records(records)


def schedules_from_frame(frame: pd.DataFrame, net: NetworkInstance) -> List[PeriodSchedule]:
    """Inverse of `schedules_frame` for the columns evaluation needs."""

    def block(row, name: str, n: int) -> np.ndarray:
        return np.array([row[f"{name}_{k}"] for k in range(n)], dtype=float)

    out = []
    for _, row in frame.iterrows():
        out.append(
            PeriodSchedule(
                period=int(row["period"]),
                p=block(row, "p", net.n_gen),
                r_up=block(row, "r_up", net.n_gen),
                r_dn=block(row, "r_dn", net.n_gen),
                f=block(row, "f", net.n_lines),
                beta=block(row, "beta", net.buses),
                alpha=float(row["alpha"]),
                objective=float(row["objective"]),
                first_stage_cost=float(row["first_stage_cost"]),
                status=str(row.get("status", "optimal")),
            )
        )
    return out
