# sdk/solver/milp_solver.py
"""
Best-first branch and bound over binary variables, on top of `solve_lp`.

Nodes are ordered by their LP relaxation value (ties by creation order);
branching picks the most fractional binary, lowest index first.
Maximisation is handled by negating the objective at the boundary.
"""

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from sdk.config.settings import settings, logger
from sdk.core.exceptions import DimensionError
from sdk.solver.lp_solver import INFEASIBLE, UNBOUNDED, LinearProgram, solve_lp

GAP_NOT_CLOSED = "gap_not_closed"

NodeTrace = Callable[[int, float, float, int], None]


@dataclass(frozen=True)
class MixedBinaryProgram:
    lp: LinearProgram
    binaries: Tuple[int, ...]
    sense: str = "min"

    def validate(self) -> None:
        self.lp.validate()
        if self.sense not in ("min", "max"):
            raise DimensionError(f"[MixedBinaryProgram] unknown sense {self.sense!r}")
        n = self.lp.n
        for j in self.binaries:
            if not 0 <= j < n:
                raise DimensionError(f"[MixedBinaryProgram] binary index {j} out of range 0..{n - 1}")
            if self.lp.lb[j] < 0.0 or self.lp.ub[j] > 1.0:
                raise DimensionError(
                    f"[MixedBinaryProgram] binary {j} has bounds [{self.lp.lb[j]}, {self.lp.ub[j]}] outside [0, 1]"
                )


@dataclass(frozen=True)
class MilpResult:
    status: str
    primal: Optional[np.ndarray]
    objective: float
    bound: float
    nodes: int

    @property
    def has_incumbent(self) -> bool:
        return self.primal is not None


def solve_milp(
    p: MixedBinaryProgram,
    gap_tol: Optional[float] = None,
    node_limit: Optional[int] = None,
    trace: Optional[NodeTrace] = None,
) -> MilpResult:
    """
    Solve a mixed-binary program by best-first branch and bound.

    Args:
        p (MixedBinaryProgram): LP data plus the binary index set.
        gap_tol (float, optional): Relative gap |objective − bound| ≤ gap_tol·(1+|objective|).
            Defaults to settings.GAP_TOL.
        node_limit (int, optional): Maximum number of processed nodes.
            Defaults to settings.NODE_LIMIT.
        trace (callable, optional): Called once per processed node with
            (node number, node bound, incumbent value, open nodes).

    Returns:
        MilpResult: `optimal`, `infeasible`, `unbounded` or `gap_not_closed`
        (node limit hit; the incumbent, possibly None, and the proven bound).
    """
    p.validate()
    gap_tol = settings.GAP_TOL if gap_tol is None else gap_tol
    node_limit = settings.NODE_LIMIT if node_limit is None else node_limit
    flip = -1.0 if p.sense == "max" else 1.0
    base = p.lp.with_objective(flip * p.lp.c)
    binaries = np.asarray(sorted(p.binaries), dtype=int)

    def finish(status: str, x: Optional[np.ndarray], value: float, bound: float, nodes: int) -> MilpResult:
        if x is not None:
            x = x.copy()
            x[binaries] = np.round(x[binaries])
        return MilpResult(status, x, flip * value, flip * bound, nodes)

    root = solve_lp(base)
    if root.status == INFEASIBLE:
        return finish(INFEASIBLE, None, np.inf, np.inf, 1)
    if root.status == UNBOUNDED:
        return finish(UNBOUNDED, None, -np.inf, -np.inf, 1)

    counter = itertools.count()
    heap = [(root.objective, next(counter), base.lb.copy(), base.ub.copy(), root.primal)]
    incumbent_x: Optional[np.ndarray] = None
    incumbent = np.inf
    nodes = 0

    while heap:
        node_bound = heap[0][0]
        if incumbent_x is not None and node_bound >= incumbent - gap_tol * (1.0 + abs(incumbent)):
            return finish("optimal", incumbent_x, incumbent, min(node_bound, incumbent), nodes)
        if nodes >= node_limit:
            logger.warning(f"[solve_milp] node limit {node_limit} reached with {len(heap)} open node(s)")
            return finish(GAP_NOT_CLOSED, incumbent_x, incumbent, min(node_bound, incumbent), nodes)

        bound, _, lb, ub, x = heapq.heappop(heap)
        nodes += 1
        if trace is not None:
            trace(nodes, flip * bound, flip * incumbent, len(heap))

        frac = np.abs(x[binaries] - np.round(x[binaries])) if binaries.size else np.zeros(0)
        if frac.size == 0 or frac.max() <= settings.INTEGRALITY_TOL:
            if bound < incumbent:
                incumbent, incumbent_x = bound, x
            continue

        j = int(binaries[int(np.argmax(frac))])
        for lo, hi in ((0.0, 0.0), (1.0, 1.0)):
            child_lb, child_ub = lb.copy(), ub.copy()
            child_lb[j], child_ub[j] = lo, hi
            sol = solve_lp(base.with_bounds(child_lb, child_ub))
            if sol.status != "optimal":
                continue
            if sol.objective < incumbent - gap_tol * (1.0 + abs(incumbent)):
                heapq.heappush(heap, (sol.objective, next(counter), child_lb, child_ub, sol.primal))

    if incumbent_x is None:
        return finish(INFEASIBLE, None, np.inf, np.inf, nodes)
    return finish("optimal", incumbent_x, incumbent, incumbent, nodes)


def enumerate_binaries(p: MixedBinaryProgram) -> MilpResult:
    """
    Exhaustive reference solver: fix every 0/1 pattern and solve the LP.

    Used to certify `solve_milp` on small instances (≤ 12 binaries).
    """
    p.validate()
    flip = -1.0 if p.sense == "max" else 1.0
    base = p.lp.with_objective(flip * p.lp.c)
    binaries = list(sorted(p.binaries))
    best_x, best = None, np.inf
    patterns = 0
    for pattern in itertools.product((0.0, 1.0), repeat=len(binaries)):
        patterns += 1
        lb, ub = base.lb.copy(), base.ub.copy()
        lb[binaries] = pattern
        ub[binaries] = pattern
        if np.any(lb > ub):
            continue
        sol = solve_lp(base.with_bounds(lb, ub))
        if sol.status == "optimal" and sol.objective < best - 1e-12:
            best, best_x = sol.objective, sol.primal
    if best_x is None:
        return MilpResult(INFEASIBLE, None, flip * np.inf, flip * np.inf, patterns)
    return MilpResult("optimal", best_x, flip * best, flip * best, patterns)
