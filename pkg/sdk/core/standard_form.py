# sdk/core/standard_form.py
"""
Bring a recourse LP with mixed row senses and general bounds into the
equality form W u = h − T z, u ≥ 0 used by every oracle and master.

Rules:
  * a variable with lower bound exactly 0 is kept; a finite upper bound becomes
    a `<=` row;
  * any other variable is split u = u⁺ − u⁻ and each finite bound becomes a row;
  * each `<=` row gains +s, each `>=` row gains −s, with s ≥ 0 at zero cost.

No variable shift is applied, so the recourse value is unchanged (no constant
offset appears in the objective).
"""

import math
from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import field_validator

from sdk.core.exceptions import DimensionError
from sdk.core.schema import ArrayModel, as_array


class RowSense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class RawRecourse(ArrayModel):
    """
    min q·u  s.t.  A u (sense) h − T z,  lb ≤ u ≤ ub.

    The right-hand side is not stored here; it is mapped per scenario with
    `StandardRecourse.transform_h` / `transform_T`.
    """

    q: np.ndarray
    A: np.ndarray
    senses: Tuple[RowSense, ...]
    lb: np.ndarray
    ub: np.ndarray

    @field_validator("q", mode="before")
    def _coerce_q(cls, value):
        return as_array(value, 1, "raw.q")

    @field_validator("A", mode="before")
    def _coerce_A(cls, value):
        return as_array(value, 2, "raw.A")

    @field_validator("lb", "ub", mode="before")
    def _coerce_bounds(cls, value, info):
        fill = -math.inf if info.field_name == "lb" else math.inf
        return as_array([fill if v is None else v for v in value], 1, f"raw.{info.field_name}", allow_inf=True)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def m(self) -> int:
        return len(self.senses)


class StandardRecourse(ArrayModel):
    W: np.ndarray
    q: np.ndarray
    split: np.ndarray
    """(n_raw × n_struct) map with u_raw = split @ u_std[:n_struct]."""
    bound_rhs: np.ndarray
    n_raw_rows: int

    @property
    def n_struct(self) -> int:
        return self.split.shape[1]

    def transform_h(self, h_raw: np.ndarray) -> np.ndarray:
        h_raw = np.asarray(h_raw, dtype=float)
        if h_raw.size != self.n_raw_rows:
            raise DimensionError(f"[transform_h] expected {self.n_raw_rows} raw rows, got {h_raw.size}")
        return np.concatenate([h_raw, self.bound_rhs])

    def transform_T(self, T_raw: np.ndarray) -> np.ndarray:
        T_raw = np.asarray(T_raw, dtype=float)
        if T_raw.shape[0] != self.n_raw_rows:
            raise DimensionError(f"[transform_T] expected {self.n_raw_rows} raw rows, got {T_raw.shape[0]}")
        return np.vstack([T_raw, np.zeros((self.bound_rhs.size, T_raw.shape[1]))])

    def recover(self, u_std: np.ndarray) -> np.ndarray:
        return self.split @ np.asarray(u_std, dtype=float)[: self.n_struct]


def to_standard_recourse(raw: RawRecourse) -> StandardRecourse:
    """
    Convert a mixed-sense recourse LP into equality form with u ≥ 0.

    Args:
        raw (RawRecourse): rows, senses, costs and bounds of the raw recourse.

    Returns:
        StandardRecourse: W and q in standard form, plus the maps that carry
        raw right-hand sides forward and standardized solutions back.
    """
    if raw.A.shape != (raw.m, raw.n) or raw.lb.size != raw.n or raw.ub.size != raw.n:
        raise DimensionError(f"[to_standard_recourse] inconsistent raw recourse dimensions {raw.A.shape}")

    # 1) Columns and bound rows.
    columns: List[Tuple[int, float]] = []
    bound_rows: List[Tuple[int, RowSense, float]] = []
    for j in range(raw.n):
        lo, hi = float(raw.lb[j]), float(raw.ub[j])
        if lo == 0.0:
            columns.append((j, 1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
            if math.isfinite(lo):
                bound_rows.append((j, RowSense.GE, lo))
        if math.isfinite(hi):
            bound_rows.append((j, RowSense.LE, hi))

    split = np.zeros((raw.n, len(columns)))
    for k, (j, sign) in enumerate(columns):
        split[j, k] = sign

    # 2) Row block over structural columns.
    senses = list(raw.senses) + [sense for _, sense, _ in bound_rows]
    rows = np.zeros((len(senses), len(columns)))
    rows[: raw.m] = raw.A @ split
    for r, (j, _, _) in enumerate(bound_rows):
        rows[raw.m + r] = split[j]

    # 3) One slack per inequality row.
    slack_cols = []
    for r, sense in enumerate(senses):
        if sense is RowSense.EQ:
            continue
        col = np.zeros(len(senses))
        col[r] = 1.0 if sense is RowSense.LE else -1.0
        slack_cols.append(col)
    W = np.hstack([rows, np.array(slack_cols).T]) if slack_cols else rows
    q = np.concatenate([split.T @ raw.q, np.zeros(len(slack_cols))])

    return StandardRecourse(
        W=_frozen(W),
        q=_frozen(q),
        split=_frozen(split),
        bound_rhs=_frozen(np.array([value for _, _, value in bound_rows], dtype=float)),
        n_raw_rows=raw.m,
    )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr
