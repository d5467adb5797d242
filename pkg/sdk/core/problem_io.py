# sdk/core/problem_io.py

import json
import os
from typing import Any, Dict

import numpy as np
from pydantic import ValidationError

from sdk.config.settings import logger
from sdk.core.exceptions import InputError, NotFoundError
from sdk.core.models import ContextQuery, FirstStage, ScenarioSet, TwoStageProblem
from sdk.core.schema import json_ready
from sdk.core.validation import validate_problem


def _reject_constant(token: str):
    raise InputError(f"non-finite number {token!r} is not allowed in input files")


def read_json(path: str) -> Any:
    """Read a JSON document, rejecting NaN/Infinity tokens."""
    if not os.path.isfile(path):
        raise NotFoundError(f"file not found: {path}", {"path": str(path)})
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", {"path": str(path)}) from None


def write_json(payload: Any, path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(json_ready(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def validation_message(exc: ValidationError) -> str:
    """Flatten a pydantic ValidationError into `field.path: message` pairs."""
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ()))
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


def problem_from_dict(data: Dict[str, Any]) -> TwoStageProblem:
    """
    Build and validate a TwoStageProblem from its interchange dictionary.

    Raises:
        InputError: On missing keys, schema violations, or failed diagnostics.
    """
    missing = [k for k in ("c", "Z", "W", "scenarios") if k not in data]
    if missing:
        raise InputError(f"problem is missing key(s): {', '.join(missing)}")
    try:
        z_raw = dict(data["Z"])
        d_z = len(data["c"])
        z_raw.setdefault("A_eq", np.zeros((0, d_z)))
        z_raw.setdefault("b_eq", [])
        z_raw.setdefault("A_in", np.zeros((0, d_z)))
        z_raw.setdefault("b_in", [])
        z_raw.setdefault("lb", [0.0] * d_z)
        z_raw.setdefault("ub", [None] * d_z)
        problem = TwoStageProblem(
            c=data["c"],
            Z=FirstStage(**z_raw),
            q=data.get("q"),
            W=data["W"],
            scenarios=ScenarioSet(**data["scenarios"]),
            uncertainty_kind=data.get("uncertainty_kind", "rhs_h_only"),
            h=data.get("h"),
            T=data.get("T"),
        )
    except ValidationError as exc:
        raise InputError(f"invalid problem: {validation_message(exc)}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid problem: {exc}") from None

    diagnostics = validate_problem(problem)
    if diagnostics:
        raise InputError(
            "problem failed validation: " + "; ".join(d.message for d in diagnostics),
            {"diagnostics": [d.to_dict() for d in diagnostics]},
        )
    return problem


def problem_to_dict(p: TwoStageProblem) -> Dict[str, Any]:
    sc = p.scenarios
    out: Dict[str, Any] = {
        "c": p.c,
        "Z": {
            "A_eq": p.Z.A_eq,
            "b_eq": p.Z.b_eq,
            "A_in": p.Z.A_in,
            "b_in": p.Z.b_in,
            "lb": p.Z.lb,
            "ub": p.Z.ub,
        },
        "q": p.q,
        "W": p.W,
        "scenarios": {
            "x": sc.x,
            "h": sc.h,
            "T": sc.T,
            "q": sc.q,
            "categorical_mask": sc.categorical_mask,
        },
        "uncertainty_kind": p.uncertainty_kind.value,
        "h": p.h,
        "T": p.T,
    }
    return out


def load_problem(path: str) -> TwoStageProblem:
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: problem file must hold a JSON object")
    problem = problem_from_dict(data)
    logger.debug(
        f"[load_problem] {path}: d_z={problem.d_z} d_u={problem.d_u} d_h={problem.d_h} S={problem.scenarios.S}"
    )
    return problem


def save_problem(p: TwoStageProblem, path: str) -> None:
    write_json(problem_to_dict(p), path)


def load_context(path: str) -> ContextQuery:
    """Context file: {"x": [...], "norm": "inf"|"one", "gamma": g | "delta": d}."""
    data = read_json(path)
    if isinstance(data, list):
        data = {"x": data}
    try:
        return ContextQuery(**data)
    except ValidationError as exc:
        raise InputError(f"invalid context: {validation_message(exc)}") from None


def load_vector(path: str, key: str) -> np.ndarray:
    """Read a vector stored either as a bare JSON list or under `key`."""
    data = read_json(path)
    if isinstance(data, dict):
        if key not in data:
            raise InputError(f"{path}: missing key {key!r}")
        data = data[key]
    try:
        arr = np.asarray(data, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InputError(f"{path}: {key} must be a list of numbers") from None
    return arr
