# sdk/core/models.py
"""
Problem data types.

All models are frozen pydantic models whose array fields are read-only numpy
arrays, so instances can be shared freely between solves.
"""

import hashlib
import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from sdk.core.schema import ArrayModel, as_array
from sdk.solver.lp_solver import LinearProgram


class UncertaintyKind(str, Enum):
    RHS_H_ONLY = "rhs_h_only"
    RHS_H_AND_T = "rhs_h_and_T"
    OBJECTIVE_Q = "objective_q"

    @property
    def is_rhs(self) -> bool:
        return self is not UncertaintyKind.OBJECTIVE_Q


class Norm(str, Enum):
    """Norm of the ε-ball around the context; the dual norm swaps inf and one."""

    INF = "inf"
    ONE = "one"

    @property
    def dual(self) -> "Norm":
        return Norm.ONE if self is Norm.INF else Norm.INF

    def of(self, v: np.ndarray) -> float:
        if v.size == 0:
            return 0.0
        return float(np.max(np.abs(v))) if self is Norm.INF else float(np.sum(np.abs(v)))


class MasterKind(str, Enum):
    CLASSICAL = "classical"
    CONTEXTUAL = "contextual"


def _vectors(value, name: str) -> Optional[Tuple[np.ndarray, ...]]:
    if value is None:
        return None
    return tuple(as_array(v, 1, f"{name}[{s}]") for s, v in enumerate(value))


def _matrices(value, name: str) -> Optional[Tuple[np.ndarray, ...]]:
    if value is None:
        return None
    return tuple(as_array(v, 2, f"{name}[{s}]") for s, v in enumerate(value))


class ScenarioSet(ArrayModel):
    """
    Paired covariate / uncertainty history {(x_s, y_s)}.

    `h` and `T` carry right-hand-side uncertainty, `q` objective uncertainty.
    A missing `T` means the technology matrix is fixed by the problem.
    """

    x: np.ndarray
    h: Optional[Tuple[np.ndarray, ...]] = None
    T: Optional[Tuple[np.ndarray, ...]] = None
    q: Optional[Tuple[np.ndarray, ...]] = None
    categorical_mask: Optional[np.ndarray] = None

    @field_validator("x", mode="before")
    def _coerce_x(cls, value):
        arr = as_array(value, 2, "scenarios.x")
        return arr

    @field_validator("h", "q", mode="before")
    def _coerce_vectors(cls, value, info):
        return _vectors(value, f"scenarios.{info.field_name}")

    @field_validator("T", mode="before")
    def _coerce_matrices(cls, value):
        return _matrices(value, "scenarios.T")

    @field_validator("categorical_mask", mode="before")
    def _coerce_mask(cls, value):
        if value is None:
            return None
        mask = np.array(value, dtype=bool).reshape(-1)
        mask.flags.writeable = False
        return mask

    @model_validator(mode="after")
    def _default_mask(self):
        if self.categorical_mask is None:
            mask = np.zeros(self.x.shape[1], dtype=bool)
            mask.flags.writeable = False
            object.__setattr__(self, "categorical_mask", mask)
        return self

    @property
    def S(self) -> int:
        return self.x.shape[0]

    @property
    def d_x(self) -> int:
        return self.x.shape[1]

    @property
    def continuous(self) -> np.ndarray:
        return ~self.categorical_mask

    def uncertain_matrix(self) -> np.ndarray:
        """Rows y_s: stacked h_s (and flattened T_s), or q_s for objective uncertainty."""
        blocks = []
        if self.h is not None:
            blocks.append(np.vstack(self.h))
        if self.T is not None:
            blocks.append(np.vstack([t.reshape(-1) for t in self.T]))
        if self.q is not None:
            blocks.append(np.vstack(self.q))
        if not blocks:
            return np.zeros((self.S, 0))
        return np.hstack(blocks)

    def subset(self, indices) -> "ScenarioSet":
        idx = [int(i) for i in indices]

        def pick(seq):
            return None if seq is None else tuple(seq[i] for i in idx)

        return ScenarioSet(
            x=self.x[idx].reshape(len(idx), self.d_x),
            h=pick(self.h),
            T=pick(self.T),
            q=pick(self.q),
            categorical_mask=self.categorical_mask,
        )

    def restrict_categorical(self, x: np.ndarray) -> Tuple["ScenarioSet", List[int]]:
        """
        Keep only the scenarios whose categorical covariates equal those of `x`.

        Returns:
            (restricted set, kept indices); the set is unchanged when no column
            is categorical. The kept list may be empty.
        """
        mask = self.categorical_mask
        if not mask.any():
            return self, list(range(self.S))
        match = np.all(np.abs(self.x[:, mask] - np.asarray(x)[mask]) <= 1e-9, axis=1)
        kept = [int(i) for i in np.flatnonzero(match)]
        if not kept:
            return self, []
        return self.subset(kept), kept


class FirstStage(ArrayModel):
    """Polyhedron Z = {z : A_eq z = b_eq, A_in z ≤ b_in, lb ≤ z ≤ ub}."""

    A_eq: np.ndarray
    b_eq: np.ndarray
    A_in: np.ndarray
    b_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @field_validator("A_eq", "A_in", mode="before")
    def _coerce_blocks(cls, value, info):
        return as_array(value if value is not None else [], 2, f"Z.{info.field_name}")

    @field_validator("b_eq", "b_in", mode="before")
    def _coerce_rhs(cls, value, info):
        return as_array(value if value is not None else [], 1, f"Z.{info.field_name}")

    @field_validator("lb", "ub", mode="before")
    def _coerce_bounds(cls, value, info):
        # JSON null is an absent bound
        fill = -math.inf if info.field_name == "lb" else math.inf
        return as_array([fill if v is None else v for v in value], 1, f"Z.{info.field_name}", allow_inf=True)

    @classmethod
    def box(cls, lb, ub, A_in=None, b_in=None, A_eq=None, b_eq=None) -> "FirstStage":
        n = len(lb)
        return cls(
            A_eq=A_eq if A_eq is not None else np.zeros((0, n)),
            b_eq=b_eq if b_eq is not None else [],
            A_in=A_in if A_in is not None else np.zeros((0, n)),
            b_in=b_in if b_in is not None else [],
            lb=list(lb),
            ub=list(ub),
        )

    @property
    def n(self) -> int:
        return self.lb.size

    def as_lp(self, c: np.ndarray) -> LinearProgram:
        A_eq = self.A_eq if self.A_eq.size else np.zeros((0, self.n))
        A_in = self.A_in if self.A_in.size else np.zeros((0, self.n))
        return LinearProgram.build(c, A_eq, self.b_eq, A_in, self.b_in, self.lb, self.ub)


class TwoStageProblem(ArrayModel):
    """
    min_{z ∈ Z} c·z + max_{y ∈ Y_Γ(x)} min_u {q·u : W u = h − T z, u ≥ 0}.

    Right-hand-side kinds take h_s (and T_s) from the scenarios and a fixed q;
    the objective kind takes q_s from the scenarios and fixed h, T.
    """

    c: np.ndarray
    Z: FirstStage
    q: Optional[np.ndarray] = None
    W: np.ndarray
    scenarios: ScenarioSet
    uncertainty_kind: UncertaintyKind = UncertaintyKind.RHS_H_ONLY
    h: Optional[np.ndarray] = None
    T: Optional[np.ndarray] = None

    @field_validator("c", "q", "h", mode="before")
    def _coerce_vector(cls, value, info):
        return None if value is None else as_array(value, 1, info.field_name)

    @field_validator("W", "T", mode="before")
    def _coerce_matrix(cls, value, info):
        return None if value is None else as_array(value, 2, info.field_name)

    @property
    def d_z(self) -> int:
        return self.c.size

    @property
    def d_u(self) -> int:
        return self.W.shape[1]

    @property
    def d_h(self) -> int:
        return self.W.shape[0]

    @property
    def t_is_fixed(self) -> bool:
        return self.scenarios.T is None

    def fixed_T(self) -> np.ndarray:
        return self.T if self.T is not None else np.zeros((self.d_h, self.d_z))

    def scenario_h(self) -> np.ndarray:
        if self.scenarios.h is not None:
            return np.vstack(self.scenarios.h)
        return np.tile(self.h, (self.scenarios.S, 1))

    def scenario_T(self) -> np.ndarray:
        if self.scenarios.T is not None:
            return np.stack(self.scenarios.T)
        return np.tile(self.fixed_T(), (self.scenarios.S, 1, 1))

    def scenario_q(self) -> np.ndarray:
        if self.scenarios.q is not None:
            return np.vstack(self.scenarios.q)
        return np.tile(self.q, (self.scenarios.S, 1))

    def rhs(self, z: np.ndarray) -> np.ndarray:
        """Rows r_s = h_s − T_s z, shape (S, d_h)."""
        return self.scenario_h() - np.einsum("sij,j->si", self.scenario_T(), z)

    def recourse_cost(self) -> np.ndarray:
        return self.q if self.q is not None else self.scenario_q().mean(axis=0)

    def with_scenarios(self, scenarios: ScenarioSet) -> "TwoStageProblem":
        return self.model_copy(update={"scenarios": scenarios})

    def fingerprint(self) -> str:
        """SHA-256 over (W, q): the data that fixes the dual polytope Π = {π : Wᵀπ ≤ q}."""
        digest = hashlib.sha256()
        q = self.q if self.q is not None else self.scenario_q().reshape(-1)
        for arr in (self.W, q):
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            digest.update(repr(arr.shape).encode("utf-8"))
            digest.update(arr.tobytes())
        return digest.hexdigest()


class ContextQuery(ArrayModel):
    """One conditioning request: context x, norm, and Γ (explicit) or δ (relative to Γ₀)."""

    x: np.ndarray
    norm: Norm = Norm.INF
    gamma: Optional[float] = None
    delta: Optional[float] = None

    @field_validator("x", mode="before")
    def _coerce_x(cls, value):
        return as_array(value, 1, "context.x")

    @field_validator("gamma", "delta", mode="before")
    def _nonnegative(cls, value, info):
        if value is None:
            return None
        value = float(value)
        if math.isnan(value) or value < 0.0:
            raise ValueError(f"{info.field_name} must be nonnegative, got {value}")
        if info.field_name == "delta" and math.isinf(value):
            raise ValueError("delta must be finite")
        return value

    def with_x(self, x) -> "ContextQuery":
        return ContextQuery(x=x, norm=self.norm, gamma=self.gamma, delta=self.delta)


class Solution(ArrayModel):
    """
    Result of one solve.

    `status` is `optimal`, `infeasible` (empty z, objective +inf),
    `iteration_limit`, or `stalled` when the oracle returns a cut the master
    already holds before the gap closes.
    """

    z: np.ndarray
    objective: float
    alpha: float
    lb_trace: List[float] = Field(default_factory=list)
    ub_trace: List[float] = Field(default_factory=list)
    iterations: int = 0
    oracle_calls: int = 0
    status: str = "optimal"
    master_kind: Optional[MasterKind] = None
    gamma0: Optional[float] = None
    gamma: Optional[float] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class Diagnostic(ArrayModel):
    code: str
    message: str
    index: Optional[int] = None
