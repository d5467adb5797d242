# file: sdk/cli/energy_cli.py

import os
import shutil

import click
import pandas as pd

from sdk.ccg.algorithm import CcgOptions
from sdk.ccg.cut_pool import pool_load, pool_save
from sdk.cli.problem_cli import emit
from sdk.config.settings import logger
from sdk.core.exceptions import EXIT_LIMIT, EXIT_OK, InputError, NotFoundError
from sdk.core.models import MasterKind
from sdk.core.problem_io import write_json
from sdk.energy.evaluation import evaluate_oos
from sdk.energy.fixtures import write_fixture
from sdk.energy.network import load_network
from sdk.energy.rolling import ContextMode, load_series, rolling_run, schedules_frame, schedules_from_frame

SCHEDULES_CSV = "schedules.csv"
NETWORK_JSON = "network.json"


@click.group()
def energy_cli():
    """
    Hour-ahead energy and reserve scheduling experiment.
    """
    pass


# ------------------------------------------------------------------------------
# FIXTURE
# ------------------------------------------------------------------------------
@energy_cli.command("fixture")
@click.option("--seed", type=int, default=0, help="Random seed of the renewable series.")
@click.option("--periods", type=int, default=24, help="Scheduled periods.")
@click.option("--window", "window_len", type=int, default=48, help="Hours of history before the first period.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
def fixture_cmd(seed, periods, window_len, out_dir):
    """
    Write the 3-bus network, its renewable history and the realized outputs.
    """
    emit(write_fixture(out_dir, seed=seed, periods=periods, window_len=window_len))
    return EXIT_OK


# ------------------------------------------------------------------------------
# RUN
# ------------------------------------------------------------------------------
@energy_cli.command("run")
@click.option("--network", "network_path", required=True, help="Network JSON file.")
@click.option("--history", "history_path", required=True, help="Hourly renewable history CSV.")
@click.option("--window", "window_len", type=int, default=48, help="Scenario window length (hours).")
@click.option("--delta", type=float, default=None, help="Γ = (1+δ)·Γ₀.")
@click.option("--horizon", type=int, default=None, help="Periods to schedule (default: all).")
@click.option("--mode", type=click.Choice([m.value for m in ContextMode]), default=ContextMode.AR1_DUMMY.value)
@click.option("--master", type=click.Choice([k.value for k in MasterKind]), default=MasterKind.CONTEXTUAL.value)
@click.option("--oracle", "oracle_name", type=click.Choice(["d", "p"]), default="d")
@click.option("--cold", is_flag=True, default=False, help="Do not carry the cut pool between periods.")
@click.option("--warm", "warm_path", default=None, help="Cut pool to start the first period from.")
@click.option("--realized", "realized_path", default=None, help="Also evaluate against this realized-output CSV.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
def run_cmd(network_path, history_path, window_len, delta, horizon, mode, master, oracle_name, cold, warm_path,
            realized_path, out_dir):
    """
    Schedule every period with a rolling window and write schedules, pool and summary.
    """
    net = load_network(network_path)
    history = load_series(history_path, net.n_ren)
    opts = CcgOptions(master_kind=MasterKind(master), oracle=oracle_name)
    pool = pool_load(warm_path) if warm_path else None
    result = rolling_run(
        net,
        history,
        window_len,
        delta=delta,
        opts=opts,
        mode=ContextMode(mode),
        horizon=horizon,
        warm=not cold,
        pool=pool,
    )

    os.makedirs(out_dir, exist_ok=True)
    schedules_frame(result.schedules).to_csv(os.path.join(out_dir, SCHEDULES_CSV), index=False)
    if os.path.abspath(network_path) != os.path.abspath(os.path.join(out_dir, NETWORK_JSON)):
        shutil.copyfile(network_path, os.path.join(out_dir, NETWORK_JSON))
    if result.pool is not None:
        pool_save(result.pool, os.path.join(out_dir, "pool.json"))
    summary = {
        "periods": len(result.schedules),
        "total_objective": result.total_objective,
        "oracle_calls": result.oracle_calls,
        "pool_sizes": result.pool_sizes,
        "statuses": [s.status for s in result.schedules],
        "mode": mode,
        "warm": not cold,
    }
    write_json(summary, os.path.join(out_dir, "run.json"))
    if realized_path:
        evaluate_oos(result.schedules, load_series(realized_path, net.n_ren), net).write(out_dir)
    emit(summary)
    logger.info(f"[energy run] {len(result.schedules)} period(s) -> {out_dir}")
    return EXIT_OK if all(s.status == "optimal" for s in result.schedules) else EXIT_LIMIT


# ------------------------------------------------------------------------------
# EVAL
# ------------------------------------------------------------------------------
@energy_cli.command("eval")
@click.option("--schedules", "schedules_dir", required=True, help="Directory written by `energy run`.")
@click.option("--realized", "realized_path", required=True, help="Realized renewable output CSV.")
@click.option("--network", "network_path", default=None, help="Network JSON (default: the copy in the schedules dir).")
@click.option("--out", "out_dir", default=None, help="Report directory (default: the schedules dir).")
def eval_cmd(schedules_dir, realized_path, network_path, out_dir):
    """
    Re-dispatch the committed schedules against realized output; write report.json and report.csv.
    """
    net = load_network(network_path or os.path.join(schedules_dir, NETWORK_JSON))
    path = os.path.join(schedules_dir, SCHEDULES_CSV)
    if not os.path.isfile(path):
        raise NotFoundError(f"file not found: {path}", {"path": path})
    try:
        schedules = schedules_from_frame(pd.read_csv(path), net)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed schedules ({exc})", {"path": path}) from None
    report = evaluate_oos(schedules, load_series(realized_path, net.n_ren), net)
    report.write(out_dir or schedules_dir)
    emit(report)
    return EXIT_OK
