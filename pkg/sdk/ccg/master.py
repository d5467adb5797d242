# sdk/ccg/master.py
"""
Master problems of the master-oracle loop.

Variables are laid out as [z | α | per-cut blocks]. Both masters are LPs and
are rebuilt from their cut lists on every solve.

Classical cut k (worst-case realization h^(k), T^(k)), new variables u_k ≥ 0:

    q·u_k − α ≤ 0,        W u_k + T^(k) z = h^(k)

Contextual cut k (dual vertex π_k), new variables ρ_k free and the dual-norm
block w_k encoding γ_k and Γ‖γ_k‖_*:

    ρ_k + (x·γ_k + Γ‖γ_k‖_*) − α ≤ 0
    ρ_k + x_s·γ_k + (T_sᵀπ_k)·z ≥ π_kᵀh_s      for every scenario s
    G w_k ≥ 0
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from sdk.config.settings import logger
from sdk.core.exceptions import InfeasibleError, InputError
from sdk.core.models import MasterKind, TwoStageProblem
from sdk.ddcu.budget import BudgetSpec, DualNormBlock, dual_norm_block
from sdk.oracle.recourse import lower_multipliers
from sdk.solver.lp_solver import INFEASIBLE, UNBOUNDED, LinearProgram, solve_lp


def cut_value(p: TwoStageProblem, budget: BudgetSpec, x: np.ndarray, pi: np.ndarray, z: np.ndarray) -> float:
    """
    Value at (z, x) of the contextual cut induced by π:

        L_π(z, x) = max{Σθ_s πᵀ(h_s − T_s z) : θ admissible for x}  ≤  Q(z, x).
    """
    R = p.rhs(np.asarray(z, dtype=float))
    return lower_multipliers(budget, p.scenarios.x, np.asarray(x, dtype=float), R @ np.asarray(pi, dtype=float))[0]


@dataclass
class MasterSolution:
    z: np.ndarray
    alpha: Optional[float]
    objective: float


@dataclass
class MasterProblem:
    problem: TwoStageProblem
    budget: BudgetSpec
    x: np.ndarray
    kind: MasterKind
    pis: List[np.ndarray] = field(default_factory=list)
    realizations: List[tuple] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._block: DualNormBlock = dual_norm_block(self.budget.categorical_mask, self.budget.norm, self.budget.gamma)

    @property
    def n_cuts(self) -> int:
        return len(self.pis) if self.kind is MasterKind.CONTEXTUAL else len(self.realizations)

    def add_pi(self, pi: np.ndarray) -> None:
        if self.kind is not MasterKind.CONTEXTUAL:
            raise InputError("dual-vertex cuts belong to the contextual master")
        self.pis.append(np.asarray(pi, dtype=float))

    def add_realization(self, h: np.ndarray, T: np.ndarray) -> None:
        if self.kind is not MasterKind.CLASSICAL:
            raise InputError("scenario cuts belong to the classical master")
        self.realizations.append((np.asarray(h, dtype=float), np.asarray(T, dtype=float)))

    def _cut_width(self) -> int:
        if self.kind is MasterKind.CLASSICAL:
            return self.problem.d_u
        return 1 + self._block.n

    def build(self) -> LinearProgram:
        p = self.problem
        d_z = p.d_z
        with_alpha = self.n_cuts > 0
        width = self._cut_width()
        N = d_z + (1 if with_alpha else 0) + self.n_cuts * width
        a = d_z

        c = np.zeros(N)
        c[:d_z] = p.c
        lb = np.zeros(N)
        ub = np.full(N, np.inf)
        lb[:d_z], ub[:d_z] = p.Z.lb, p.Z.ub

        eq_rows, eq_rhs, in_rows, in_rhs = [], [], [], []
        for i in range(p.Z.A_eq.shape[0] if p.Z.A_eq.size else 0):
            r = np.zeros(N)
            r[:d_z] = p.Z.A_eq[i]
            eq_rows.append(r)
            eq_rhs.append(p.Z.b_eq[i])
        for i in range(p.Z.A_in.shape[0] if p.Z.A_in.size else 0):
            r = np.zeros(N)
            r[:d_z] = p.Z.A_in[i]
            in_rows.append(r)
            in_rhs.append(p.Z.b_in[i])

        if with_alpha:
            c[a] = 1.0
            lb[a] = -np.inf
        start = d_z + 1

        if self.kind is MasterKind.CLASSICAL:
            for k, (h_k, T_k) in enumerate(self.realizations):
                cols = slice(start + k * width, start + (k + 1) * width)
                r = np.zeros(N)
                r[cols] = p.q
                r[a] = -1.0
                in_rows.append(r)
                in_rhs.append(0.0)
                for i in range(p.d_h):
                    r = np.zeros(N)
                    r[cols] = p.W[i]
                    r[:d_z] = T_k[i]
                    eq_rows.append(r)
                    eq_rhs.append(h_k[i])
        else:
            block = self._block
            H = p.scenario_h()
            Ts = p.scenario_T()
            Xg = p.scenarios.x @ block.gamma_map
            xg = self.x @ block.gamma_map + block.cost
            for k, pi in enumerate(self.pis):
                rho = start + k * width
                w = slice(rho + 1, rho + width)
                lb[rho] = -np.inf
                lb[w], ub[w] = block.lb, block.ub
                r = np.zeros(N)
                r[rho] = 1.0
                r[w] = xg
                r[a] = -1.0
                in_rows.append(r)
                in_rhs.append(0.0)
                for s in range(H.shape[0]):
                    r = np.zeros(N)
                    r[rho] = -1.0
                    r[w] = -Xg[s]
                    r[:d_z] = -(Ts[s].T @ pi)
                    in_rows.append(r)
                    in_rhs.append(-float(pi @ H[s]))
                for g in block.G:
                    r = np.zeros(N)
                    r[w] = -g
                    in_rows.append(r)
                    in_rhs.append(0.0)

        return LinearProgram.build(
            c,
            A_eq=np.array(eq_rows).reshape(len(eq_rows), N),
            b_eq=eq_rhs,
            A_in=np.array(in_rows).reshape(len(in_rows), N),
            b_in=in_rhs,
            lb=lb,
            ub=ub,
        )

    def solve(self) -> MasterSolution:
        """
        Raises:
            InfeasibleError: If the master (hence the first stage) is infeasible.
            InputError: If the master is unbounded.
        """
        sol = solve_lp(self.build())
        if sol.status == INFEASIBLE:
            raise InfeasibleError("master problem is infeasible: no first-stage decision satisfies Z and the cuts")
        if sol.status == UNBOUNDED:
            raise InputError(
                "master problem is unbounded: bound the first stage or start from a non-empty cut pool",
                {"cuts": self.n_cuts},
            )
        d_z = self.problem.d_z
        alpha = float(sol.primal[d_z]) if self.n_cuts else None
        logger.debug(f"[master] {self.kind.value} cuts={self.n_cuts} objective={sol.objective:.9g}")
        return MasterSolution(z=sol.primal[:d_z].copy(), alpha=alpha, objective=sol.objective)
