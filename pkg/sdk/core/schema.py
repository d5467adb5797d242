# sdk/core/schema.py

import math
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict


def as_array(value: Any, ndim: int, name: str, allow_inf: bool = False) -> np.ndarray:
    """
    Coerce `value` to a read-only float64 array of exactly `ndim` dimensions.

    Raises:
        ValueError: On ragged input, wrong rank, NaN, or ±inf (unless allowed).
    """
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: not a rectangular numeric array ({exc})") from None
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != ndim:
        raise ValueError(f"{name}: expected a {ndim}-D array, got shape {arr.shape}")
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name}: NaN is not allowed")
    if not allow_inf and np.any(np.isinf(arr)):
        raise ValueError(f"{name}: infinite values are not allowed")
    arr.flags.writeable = False
    return arr


def json_ready(obj: Any) -> Any:
    """Recursively convert numpy values to JSON-safe python (non-finite floats become None)."""
    if isinstance(obj, BaseModel):
        return json_ready(obj.model_dump())
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class ArrayModel(BaseModel):
    """Frozen pydantic base for models that carry numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def to_dict(self) -> dict:
        return json_ready(self)
