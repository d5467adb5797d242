# sdk/energy/evaluation.py

import os
from typing import List

import numpy as np
import pandas as pd

from sdk.config.settings import logger
from sdk.core.exceptions import DimensionError
from sdk.core.problem_io import write_json
from sdk.core.schema import ArrayModel
from sdk.core.standard_form import to_standard_recourse
from sdk.energy.dispatch import PeriodSchedule, StageLayout, raw_recourse, raw_rhs, raw_technology
from sdk.energy.network import NetworkInstance
from sdk.oracle.recourse import solve_recourse

LOLP_FRACTION = 1e-3
PWS_FRACTION = 1e-3


class OutOfSampleReport(ArrayModel):
    """
    Realized performance of a schedule sequence.

    `total_cost` is first-stage cost plus realized re-dispatch and penalty
    cost; both components are also reported on their own.
    """

    periods: List[int]
    total_cost: float
    first_stage_cost: float
    imbalance_cost: float
    lolp: float
    pws: float
    shed: np.ndarray
    spill: np.ndarray
    hourly_cost: np.ndarray
    balance_residual: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "hour": self.periods,
                "shed": self.shed,
                "spill": self.spill,
                "cost": self.hourly_cost,
            }
        )

    def write(self, out_dir: str) -> None:
        """Write `report.json` and the flat `report.csv` into out_dir."""
        os.makedirs(out_dir, exist_ok=True)
        write_json(self.to_dict(), os.path.join(out_dir, "report.json"))
        self.to_frame().to_csv(os.path.join(out_dir, "report.csv"), index=False)


def evaluate_oos(schedules: List[PeriodSchedule], realized_y: np.ndarray, net: NetworkInstance) -> OutOfSampleReport:
    """
    Re-dispatch every committed schedule against the realized renewable output.

    Row `schedule.period` of `realized_y` is the realization of that period.
    The recourse always has a solution since shedding and spillage absorb any
    imbalance.

    Raises:
        DimensionError: If `realized_y` does not cover the schedules' periods or renewables.
    """
    realized_y = np.asarray(realized_y, dtype=float)
    if realized_y.ndim != 2 or realized_y.shape[1] != net.n_ren:
        raise DimensionError(f"realized output must be periods × {net.n_ren}, got shape {realized_y.shape}")
    layout = StageLayout.of(net)
    T_raw = raw_technology(net)
    G = net.gen_map()
    A = net.incidence()
    E = net.ren_map()

    periods, shed, spill, first, imbalance = [], [], [], [], []
    lolp_hours = pws_hours = 0
    residual = 0.0
    for sched in schedules:
        t = sched.period
        if t >= realized_y.shape[0] or t >= net.n_periods:
            raise DimensionError(f"no realized output or demand for period {t}")
        y = realized_y[t]
        std = to_standard_recourse(raw_recourse(net, t))
        r = std.transform_h(raw_rhs(net, t, y)) - std.transform_T(T_raw) @ sched.z()
        out = solve_recourse(std.W, std.q, r)
        u = std.recover(out.u)

        shed_t = float(np.sum(u[layout.shed]))
        spill_t = float(np.sum(u[layout.spill]))
        load = float(np.sum(net.demand_at(t)))
        available = float(np.sum(y))
        if shed_t > LOLP_FRACTION * load:
            lolp_hours += 1
        if spill_t > PWS_FRACTION * available:
            pws_hours += 1

        # nodal balance of the realized dispatch
        injection = G @ (sched.p + u[layout.delta]) + A @ u[layout.f_wc] + E @ y - u[layout.spill] + u[layout.shed]
        residual = max(residual, float(np.max(np.abs(injection - net.demand_at(t)))))

        periods.append(t)
        shed.append(shed_t)
        spill.append(spill_t)
        first.append(sched.first_stage_cost)
        imbalance.append(out.value)
        logger.debug(f"[evaluate_oos] t={t} shed={shed_t:.6g} spill={spill_t:.6g} recourse={out.value:.6g}")

    n = len(periods)
    first_arr, imb_arr = np.array(first, dtype=float), np.array(imbalance, dtype=float)
    report = OutOfSampleReport(
        periods=periods,
        total_cost=float(first_arr.sum() + imb_arr.sum()),
        first_stage_cost=float(first_arr.sum()),
        imbalance_cost=float(imb_arr.sum()),
        lolp=lolp_hours / n if n else 0.0,
        pws=pws_hours / n if n else 0.0,
        shed=np.array(shed, dtype=float),
        spill=np.array(spill, dtype=float),
        hourly_cost=first_arr + imb_arr,
        balance_residual=residual,
    )
    logger.info(
        f"[evaluate_oos] hours={n} total_cost={report.total_cost:.6f} lolp={report.lolp:.4f} pws={report.pws:.4f}"
    )
    return report
