# sdk/oracle/bruteforce.py
"""
Reference oracle for small instances.

Q(z, ·) is convex in the scenario weights, so its maximum over the polytope
of admissible θ is attained at a vertex. The vertices are enumerated by
solving every square system of active constraints.
"""

import itertools
import math
from typing import List, Optional

import numpy as np

from sdk.config.settings import logger
from sdk.core.exceptions import DimensionError, EmptySetError
from sdk.core.models import ContextQuery, Norm, TwoStageProblem
from sdk.ddcu.budget import BudgetSpec
from sdk.oracle.bilevel import finish_oracle, prepare_oracle
from sdk.oracle.recourse import solve_recourse
from sdk.oracle.result import OracleResult

MAX_SCENARIOS = 8
MAX_COVARIATES = 3
VERTEX_TOL = 1e-9


def theta_polytope(X: np.ndarray, x: np.ndarray, budget: BudgetSpec):
    """
    θ-only description {A_eq θ = b_eq, A_in θ ≤ b_in} of the admissible weights.

    The 1-norm ball is written with one row per sign pattern over the
    continuous covariates, so no auxiliary variables are needed.
    """
    S = X.shape[0]
    cat = budget.categorical_mask
    cont = np.flatnonzero(~cat)
    eq_rows = [np.ones(S)] + [X[:, j] for j in np.flatnonzero(cat)]
    eq_rhs = [1.0] + [x[j] for j in np.flatnonzero(cat)]

    in_rows, in_rhs = [], []
    if not math.isinf(budget.gamma) and cont.size:
        if budget.norm is Norm.INF:
            for j in cont:
                for sign in (1.0, -1.0):
                    in_rows.append(sign * X[:, j])
                    in_rhs.append(sign * x[j] + budget.gamma)
        else:
            for signs in itertools.product((1.0, -1.0), repeat=cont.size):
                sigma = np.array(signs)
                in_rows.append(X[:, cont] @ sigma)
                in_rhs.append(float(x[cont] @ sigma) + budget.gamma)
    for s in range(S):
        row = np.zeros(S)
        row[s] = -1.0
        in_rows.append(row)
        in_rhs.append(0.0)
    return np.array(eq_rows), np.array(eq_rhs), np.array(in_rows), np.array(in_rhs)


def enumerate_theta_vertices(X: np.ndarray, x: np.ndarray, budget: BudgetSpec) -> List[np.ndarray]:
    """All distinct vertices of the θ-polytope, in enumeration order."""
    A_eq, b_eq, A_in, b_in = theta_polytope(X, x, budget)
    S = X.shape[0]

    # Independent subset of the equality rows.
    keep: List[int] = []
    for i in range(A_eq.shape[0]):
        if np.linalg.matrix_rank(A_eq[keep + [i]]) > len(keep):
            keep.append(i)
    A_eq, b_eq = A_eq[keep], b_eq[keep]
    need = S - len(keep)

    vertices: List[np.ndarray] = []
    for combo in itertools.combinations(range(A_in.shape[0]), need):
        A = np.vstack([A_eq, A_in[list(combo)]]) if need else A_eq
        b = np.concatenate([b_eq, b_in[list(combo)]]) if need else b_eq
        if np.linalg.matrix_rank(A) < S:
            continue
        theta = np.linalg.solve(A, b)
        if np.any(A_in @ theta > b_in + VERTEX_TOL) or np.any(np.abs(A_eq @ theta - b_eq) > VERTEX_TOL):
            continue
        theta = np.where(np.abs(theta) <= VERTEX_TOL, 0.0, theta)
        if any(np.max(np.abs(theta - v)) <= VERTEX_TOL for v in vertices):
            continue
        vertices.append(theta)
    return vertices


def oracle_bruteforce(p: TwoStageProblem, z, q: ContextQuery, budget: Optional[BudgetSpec] = None) -> OracleResult:
    """
    Evaluate Q(z, x) by visiting every vertex of the admissible θ-polytope.

    Raises:
        DimensionError: If S > 8 or d_x > 3.
    """
    sc = p.scenarios
    if sc.S > MAX_SCENARIOS or sc.d_x > MAX_COVARIATES:
        raise DimensionError(
            f"brute-force oracle is limited to S ≤ {MAX_SCENARIOS} and d_x ≤ {MAX_COVARIATES} "
            f"(got S = {sc.S}, d_x = {sc.d_x})"
        )
    data = prepare_oracle(p, z, q, budget)
    vertices = enumerate_theta_vertices(sc.x, data.x, data.budget)
    if not vertices:
        raise EmptySetError("no admissible scenario weights: the conditioned set is empty", data.budget.gamma0)

    best_theta, best = None, -math.inf
    for theta in vertices:
        value = solve_recourse(p.W, p.q, theta @ data.R, theta).value
        if value > best + 1e-12:
            best, best_theta = value, theta
    logger.debug(f"[oracle_bruteforce] {len(vertices)} vertex(es), Q={best:.9g}")
    return finish_oracle(data, best_theta, "brute", nodes=len(vertices))
