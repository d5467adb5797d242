# sdk/energy/fixtures.py
"""
Synthetic 3-bus instance with an hourly renewable series that genuinely
depends on its own lag, generated from a seed.
"""

import os
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from sdk.config.settings import logger
from sdk.core.problem_io import write_json
from sdk.energy.network import Generator, Line, NetworkInstance, Renewable, network_to_dict

BASE_LOAD = (40.0, 60.0, 80.0)
RENEWABLE_CAP = 60.0
AR_COEF = 0.8
NOISE = 6.0


def hourly_profile(hour: np.ndarray) -> np.ndarray:
    """Mean renewable output by hour of day."""
    return 30.0 + 15.0 * np.sin(2.0 * np.pi * (np.asarray(hour) % 24) / 24.0)


def renewable_history(hours: int, seed: int = 0) -> np.ndarray:
    """y_k = μ_k + φ (y_{k−1} − μ_{k−1}) + σ ε_k, clipped to [0, cap]; shape hours × 1."""
    rng = np.random.default_rng(seed)
    mu = hourly_profile(np.arange(hours))
    y = np.zeros(hours)
    y[0] = mu[0]
    for k in range(1, hours):
        y[k] = mu[k] + AR_COEF * (y[k - 1] - mu[k - 1]) + NOISE * rng.standard_normal()
        y[k] = min(max(y[k], 0.0), RENEWABLE_CAP)
    return y.reshape(hours, 1)


def three_bus_network(history: np.ndarray, window_len: int, periods: int) -> NetworkInstance:
    """
    Triangle network, one cheap and one expensive generator, one renewable at bus 2.

    Expected output ȳ of period t is the one-step AR forecast from history row
    window_len + t − 1, which never exceeds the bus-2 load.
    """
    hours = window_len + np.arange(periods)
    scale = 1.0 + 0.2 * np.sin(2.0 * np.pi * (hours % 24) / 24.0 - np.pi / 2.0)
    demand = [[round(b * s, 6) for b in BASE_LOAD] for s in scale]
    mu = hourly_profile(hours)
    forecast = mu + AR_COEF * (history[hours - 1, 0] - hourly_profile(hours - 1))
    forecast = np.clip(forecast, 0.0, RENEWABLE_CAP)
    return NetworkInstance(
        buses=3,
        lines=[
            Line(from_bus=0, to_bus=1, susceptance=10.0, capacity=100.0),
            Line(from_bus=1, to_bus=2, susceptance=10.0, capacity=100.0),
            Line(from_bus=0, to_bus=2, susceptance=10.0, capacity=100.0),
        ],
        generators=[
            Generator(bus=0, p_min=0.0, p_max=200.0, ramp_up=100.0, ramp_dn=100.0, cost=20.0, cost_up=5.0, cost_dn=2.0),
            Generator(bus=1, p_min=0.0, p_max=150.0, ramp_up=100.0, ramp_dn=100.0, cost=30.0, cost_up=6.0, cost_dn=3.0),
        ],
        renewables=[Renewable(bus=2, name="ren_0")],
        demand=demand,
        expected_output=[[round(float(v), 6)] for v in forecast],
    )


def make_fixture(seed: int = 0, periods: int = 24, window_len: int = 48) -> Tuple[NetworkInstance, np.ndarray, np.ndarray]:
    """(network, history of window_len + periods hours, realized output of each period)."""
    history = renewable_history(window_len + periods, seed)
    net = three_bus_network(history, window_len, periods)
    realized = history[window_len:window_len + periods]
    return net, history, realized


def write_fixture(out_dir: str, seed: int = 0, periods: int = 24, window_len: int = 48) -> Dict[str, str]:
    """Write network.json, history.csv and realized.csv into out_dir and return their paths."""
    net, history, realized = make_fixture(seed, periods, window_len)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "network": os.path.join(out_dir, "network.json"),
        "history": os.path.join(out_dir, "history.csv"),
        "realized": os.path.join(out_dir, "realized.csv"),
    }
    columns = [r.name or f"ren_{k}" for k, r in enumerate(net.renewables)]
    write_json(network_to_dict(net), paths["network"])
    pd.DataFrame(history, columns=columns).to_csv(paths["history"], index=False, float_format="%.6f")
    pd.DataFrame(realized, columns=columns).to_csv(paths["realized"], index=False, float_format="%.6f")
    logger.info(f"[write_fixture] seed={seed} periods={periods} window={window_len} -> {out_dir}")
    return paths
