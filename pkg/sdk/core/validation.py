# sdk/core/validation.py

from typing import List

import numpy as np

from sdk.core.models import Diagnostic, TwoStageProblem, UncertaintyKind
from sdk.solver.lp_solver import INFEASIBLE, solve_lp


def _rows(A: np.ndarray) -> int:
    return A.shape[0] if A.size else 0


def validate_problem(p: TwoStageProblem) -> List[Diagnostic]:
    """
    Check every structural invariant of a TwoStageProblem.

    Never raises and never mutates `p`; the result is empty iff the problem is
    consistent. Each Diagnostic names the violated invariant (`code`) and the
    offending scenario or row index where one exists.

    Steps:
      1) First-stage block dimensions and bounds.
      2) Recourse block dimensions (W, q).
      3) Scenario set dimensions, per scenario.
      4) Uncertainty-kind consistency.
      5) Nonemptiness of Z (one Phase-I solve), only when 1)–4) passed.
    """
    out: List[Diagnostic] = []
    d_z = p.c.size
    Z = p.Z

    # 1) First stage
    if Z.lb.size != d_z or Z.ub.size != d_z:
        out.append(Diagnostic(code="dimension_mismatch", message=f"Z bounds must have length d_z = {d_z}"))
    elif np.any(Z.lb > Z.ub):
        j = int(np.flatnonzero(Z.lb > Z.ub)[0])
        out.append(Diagnostic(code="first_stage_infeasible", message=f"lb > ub for z[{j}]", index=j))
    for name in ("eq", "in"):
        A, b = getattr(Z, f"A_{name}"), getattr(Z, f"b_{name}")
        if _rows(A) and A.shape[1] != d_z:
            out.append(Diagnostic(code="dimension_mismatch", message=f"Z.A_{name} has {A.shape[1]} columns, d_z = {d_z}"))
        if _rows(A) != b.size:
            out.append(Diagnostic(code="dimension_mismatch", message=f"Z.A_{name} has {_rows(A)} rows but b_{name} has {b.size}"))

    # 2) Recourse block
    d_h, d_u = p.W.shape if p.W.ndim == 2 else (0, 0)
    kind = p.uncertainty_kind
    if kind.is_rhs:
        if p.q is None:
            out.append(Diagnostic(code="missing_field", message="q is required for right-hand-side uncertainty"))
        elif p.q.size != d_u:
            out.append(Diagnostic(code="dimension_mismatch", message=f"q has length {p.q.size}, W has {d_u} columns"))

    # 3) Scenarios
    sc = p.scenarios
    if sc.S < 1:
        out.append(Diagnostic(code="empty_scenarios", message="scenario set is empty"))
    if sc.categorical_mask.size != sc.d_x:
        out.append(
            Diagnostic(code="dimension_mismatch", message=f"categorical_mask has length {sc.categorical_mask.size}, d_x = {sc.d_x}")
        )
    for field, expected in (("h", (d_h,)), ("T", (d_h, d_z)), ("q", (d_u,))):
        seq = getattr(sc, field)
        if seq is None:
            continue
        if len(seq) != sc.S:
            out.append(Diagnostic(code="dimension_mismatch", message=f"scenarios.{field} has {len(seq)} entries, S = {sc.S}"))
        for s, arr in enumerate(seq):
            if arr.shape != expected:
                out.append(
                    Diagnostic(
                        code="dimension_mismatch",
                        message=f"scenarios.{field}[{s}] has shape {arr.shape}, expected {expected}",
                        index=s,
                    )
                )

    # 4) Kind consistency
    if kind.is_rhs:
        if sc.q is not None:
            out.append(Diagnostic(code="mixed_uncertainty", message="q-uncertainty cannot be combined with rhs uncertainty"))
        if sc.h is None:
            out.append(Diagnostic(code="missing_field", message="scenarios.h is required for right-hand-side uncertainty"))
        if kind is UncertaintyKind.RHS_H_ONLY and sc.T is not None:
            out.append(Diagnostic(code="kind_mismatch", message="rhs_h_only problems take a fixed T, not scenarios.T"))
        if kind is UncertaintyKind.RHS_H_AND_T and sc.T is None:
            out.append(Diagnostic(code="missing_field", message="rhs_h_and_T problems need scenarios.T"))
    else:
        if sc.q is None:
            out.append(Diagnostic(code="missing_field", message="scenarios.q is required for objective uncertainty"))
        if sc.h is not None or sc.T is not None:
            out.append(Diagnostic(code="mixed_uncertainty", message="objective_q problems take fixed h and T"))
        if p.h is None or p.h.size != d_h:
            out.append(Diagnostic(code="dimension_mismatch", message=f"fixed h must have length d_h = {d_h}"))
    if p.T is not None and p.T.shape != (d_h, d_z):
        out.append(Diagnostic(code="dimension_mismatch", message=f"fixed T has shape {p.T.shape}, expected {(d_h, d_z)}"))

    # 5) Z nonempty
    if not out:
        sol = solve_lp(Z.as_lp(np.zeros(d_z)))
        if sol.status == INFEASIBLE:
            out.append(Diagnostic(code="first_stage_infeasible", message="first stage infeasible: Z is empty"))
    return out
