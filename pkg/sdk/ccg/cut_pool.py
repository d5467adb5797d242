# sdk/ccg/cut_pool.py
"""
Persistent stores of what a CCG run learned.

* `CutPool` (contextual master): dual vertices π of Π = {π : Wᵀπ ≤ q}. The cuts
  they induce stay valid for any context, so a pool can warm-start later solves
  of a problem with the same (W, q).
* `ScenarioPool` (classical master): worst-case realizations (h, T). These are
  tied to the context that produced them and are reported only.
"""

import datetime
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import Field, ValidationError, field_validator

from sdk.config.settings import settings, logger
from sdk.core.exceptions import (
    FingerprintMismatchError,
    InputError,
    NotFoundError,
    PoolCorruptError,
    PoolValidationError,
)
from sdk.core.models import TwoStageProblem
from sdk.core.problem_io import read_json, validation_message, write_json
from sdk.core.schema import ArrayModel, as_array

POOL_FORMAT_VERSION = 1
PI_DEDUP_TOL = 1e-9
PI_FEAS_TOL = 1e-7


class CutEntry(ArrayModel):
    pi: np.ndarray
    source_context: np.ndarray
    source_iteration: int
    created_at: Optional[str] = None

    @field_validator("pi", "source_context", mode="before")
    def _coerce(cls, value, info):
        return as_array(value, 1, info.field_name)


class CutPool(ArrayModel):
    fingerprint: str
    entries: Tuple[CutEntry, ...] = ()
    format_version: int = Field(default=POOL_FORMAT_VERSION)

    @classmethod
    def for_problem(cls, p: TwoStageProblem) -> "CutPool":
        return cls(fingerprint=p.fingerprint())

    def __len__(self) -> int:
        return len(self.entries)

    def contains_pi(self, pi: np.ndarray) -> bool:
        pi = np.asarray(pi, dtype=float)
        return any(e.pi.size == pi.size and np.max(np.abs(e.pi - pi), initial=0.0) <= PI_DEDUP_TOL for e in self.entries)

    def with_cut(self, pi: np.ndarray, context: np.ndarray, iteration: int) -> "CutPool":
        """Return a pool with π appended, or self when π is already stored."""
        if self.contains_pi(pi):
            return self
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat() if settings.POOL_TIMESTAMPS else None
        entry = CutEntry(pi=pi, source_context=context, source_iteration=iteration, created_at=stamp)
        return self.model_copy(update={"entries": self.entries + (entry,)})

    def merge(self, other: "CutPool") -> "CutPool":
        """
        Union of two pools of the same problem, deduplicated by π.

        Raises:
            FingerprintMismatchError: If the pools belong to different (W, q).
        """
        if other.fingerprint != self.fingerprint:
            raise FingerprintMismatchError(
                "cannot merge cut pools of different problems",
                {"expected": self.fingerprint, "found": other.fingerprint},
            )
        merged = self
        for e in other.entries:
            if not merged.contains_pi(e.pi):
                merged = merged.model_copy(update={"entries": merged.entries + (e,)})
        return merged

    def check_against(self, p: TwoStageProblem) -> None:
        """
        Verify the pool belongs to `p` and every π lies in Π.

        Raises:
            FingerprintMismatchError: If (W, q) differ from the pool's source.
            PoolValidationError: Naming the first entry and row with Wᵀπ > q + 1e-7.
        """
        expected = p.fingerprint()
        if self.fingerprint != expected:
            raise FingerprintMismatchError(
                "cut pool was built for a different recourse (W, q); its cuts are not valid here",
                {"expected": expected, "found": self.fingerprint},
            )
        for k, e in enumerate(self.entries):
            if e.pi.size != p.d_h:
                raise PoolValidationError(f"pool entry {k}: π has length {e.pi.size}, d_h = {p.d_h}", k, -1)
            excess = p.W.T @ e.pi - p.q
            bad = np.flatnonzero(excess > PI_FEAS_TOL)
            if bad.size:
                row = int(bad[0])
                raise PoolValidationError(
                    f"pool entry {k}: π violates dual feasibility row {row} by {excess[row]:.3e}", k, row
                )


class ScenarioCut(ArrayModel):
    h: np.ndarray
    T: np.ndarray
    theta: np.ndarray
    source_iteration: int


class ScenarioPool(ArrayModel):
    fingerprint: str
    context: np.ndarray
    scenarios: Tuple[ScenarioCut, ...] = ()

    def __len__(self) -> int:
        return len(self.scenarios)

    def contains(self, h: np.ndarray, T: np.ndarray) -> bool:
        return any(
            np.max(np.abs(s.h - h), initial=0.0) <= PI_DEDUP_TOL and np.max(np.abs(s.T - T), initial=0.0) <= PI_DEDUP_TOL
            for s in self.scenarios
        )

    def with_scenario(self, h: np.ndarray, T: np.ndarray, theta: np.ndarray, iteration: int) -> "ScenarioPool":
        if self.contains(h, T):
            return self
        cut = ScenarioCut(h=h, T=T, theta=theta, source_iteration=iteration)
        return self.model_copy(update={"scenarios": self.scenarios + (cut,)})


def pool_to_dict(pool: CutPool) -> Dict[str, Any]:
    entries = []
    for e in pool.entries:
        item: Dict[str, Any] = {
            "pi": e.pi,
            "source_context": e.source_context,
            "source_iteration": e.source_iteration,
        }
        if e.created_at is not None:
            item["created_at"] = e.created_at
        entries.append(item)
    return {"format_version": pool.format_version, "fingerprint": pool.fingerprint, "entries": entries}


def pool_save(pool: CutPool, path: str) -> None:
    write_json(pool_to_dict(pool), path)
    logger.debug(f"[pool_save] {len(pool)} cut(s) -> {path}")


def pool_load(path: str, problem: Optional[TwoStageProblem] = None) -> CutPool:
    """
    Read a cut pool; when `problem` is given, re-check fingerprint and every π.

    Raises:
        NotFoundError: If the file does not exist.
        PoolCorruptError: If the file is not a well-formed pool document.
        FingerprintMismatchError, PoolValidationError: See `CutPool.check_against`.
    """
    try:
        data = read_json(path)
    except NotFoundError:
        raise
    except InputError as exc:
        raise PoolCorruptError(f"corrupt cut pool: {exc.message}", {"path": str(path)}) from None
    if not isinstance(data, dict) or "fingerprint" not in data or "entries" not in data:
        raise PoolCorruptError(f"{path}: not a cut pool (needs 'fingerprint' and 'entries')", {"path": str(path)})
    version = data.get("format_version", POOL_FORMAT_VERSION)
    if version != POOL_FORMAT_VERSION:
        raise PoolCorruptError(f"{path}: unsupported pool format_version {version!r}", {"path": str(path)})
    try:
        pool = CutPool(
            fingerprint=data["fingerprint"],
            entries=tuple(CutEntry(**e) for e in data["entries"]),
            format_version=version,
        )
    except ValidationError as exc:
        raise PoolCorruptError(f"{path}: {validation_message(exc)}", {"path": str(path)}) from None
    except TypeError as exc:
        raise PoolCorruptError(f"{path}: malformed entry ({exc})", {"path": str(path)}) from None
    if problem is not None:
        pool.check_against(problem)
    logger.debug(f"[pool_load] {len(pool)} cut(s) <- {path}")
    return pool
