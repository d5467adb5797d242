# sdk/core/exceptions.py

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3


class DdcroError(Exception):
    """
    Base class of every library error.

    Each subclass fixes the `code` reported in the CLI's JSON error object and
    the process exit code it maps to.
    """

    code: str = "error"
    exit_code: int = EXIT_INPUT

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.code, "message": self.message}
        payload.update(self.details)
        return payload


class InputError(DdcroError):
    code = "invalid_input"


class NotFoundError(InputError):
    code = "not_found"


class DimensionError(InputError):
    code = "dimension_mismatch"


class EmptySetError(InputError):
    """Raised when Γ is below Γ₀ (or Γ₀ is infinite) so Y_Γ(x) is empty."""

    code = "empty_set"

    def __init__(self, message: str, gamma0: float) -> None:
        super().__init__(message, {"gamma0": _json_float(gamma0)})
        self.gamma0 = gamma0


class NetworkError(InputError):
    code = "invalid_network"


class IncompleteRecourseError(InputError):
    code = "incomplete_recourse"

    def __init__(self, message: str, theta: Any = None) -> None:
        details = {} if theta is None else {"theta": [float(v) for v in theta]}
        super().__init__(message, details)
        self.theta = theta


class UnboundedOracleError(InputError):
    code = "unbounded_oracle"


class PoolCorruptError(InputError):
    code = "pool_corrupt"


class FingerprintMismatchError(InputError):
    code = "fingerprint_mismatch"


class PoolValidationError(InputError):
    code = "pool_invalid"

    def __init__(self, message: str, entry: int, row: int) -> None:
        super().__init__(message, {"entry": entry, "row": row})
        self.entry = entry
        self.row = row


class InfeasibleError(DdcroError):
    code = "infeasible"
    exit_code = EXIT_INFEASIBLE


class LimitError(DdcroError):
    code = "limit_reached"
    exit_code = EXIT_LIMIT


class LpStalledError(LimitError):
    code = "stalled"


class BigMError(LimitError):
    code = "big_m_too_small"


def _json_float(value: float) -> Any:
    value = float(value)
    return value if value == value and abs(value) != float("inf") else str(value)
