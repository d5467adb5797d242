# sdk/oracle/result.py

from typing import Optional

import numpy as np

from sdk.core.schema import ArrayModel


class OracleResult(ArrayModel):
    """
    Worst-case recourse evaluation Q(z, x) at one first-stage point.

    `pi` is a vertex of Π = {π : Wᵀπ ≤ q}; `theta` the scenario weights of the
    worst case; `rho`/`gamma_vec` the lower-level multipliers for which
    value = ρ + x·γ + Γ‖γ‖_* holds.
    """

    value: float
    pi: np.ndarray
    theta: np.ndarray
    h_star: np.ndarray
    T_star: np.ndarray
    rho: float
    gamma_vec: np.ndarray
    x_tilde: np.ndarray
    method: str
    nodes: int = 0
    big_m_escalations: int = 0
    gamma0: Optional[float] = None
    gamma: Optional[float] = None
