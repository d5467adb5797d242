# file: sdk/cli/problem_cli.py

import json
from typing import Optional

import click

from sdk.ccg.algorithm import INFEASIBLE, CcgOptions, solve_ccg, warm_start_solve
from sdk.ccg.cut_pool import pool_load, pool_save
from sdk.ccg.objective import solve_objective_uncertainty
from sdk.config.settings import logger
from sdk.core.exceptions import EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OK, InputError
from sdk.core.models import ContextQuery, MasterKind, UncertaintyKind
from sdk.core.problem_io import load_context, load_problem, load_vector
from sdk.core.schema import finite_or_none, json_ready
from sdk.ddcu.budget import resolve_budget
from sdk.ddcu.uncertainty_set import coordinate_ranges, gamma0
from sdk.oracle.bilevel import oracle_d_bilevel, oracle_p_bilevel
from sdk.oracle.bruteforce import oracle_bruteforce

ORACLE_METHODS = {"p": oracle_p_bilevel, "d": oracle_d_bilevel, "brute": oracle_bruteforce}


def emit(payload) -> None:
    """One JSON document on stdout."""
    click.echo(json.dumps(json_ready(payload), sort_keys=True))


def _query(context: str, norm: Optional[str], gamma: Optional[float], delta: Optional[float]) -> ContextQuery:
    """Context file, with the flags overriding its norm and budget."""
    q = load_context(context)
    return ContextQuery(
        x=q.x,
        norm=norm if norm is not None else q.norm,
        gamma=gamma if gamma is not None else q.gamma,
        delta=delta if delta is not None else q.delta,
    )


def context_options(fn):
    fn = click.option("--delta", type=float, default=None, help="Γ = (1+δ)·Γ₀ (default from DDCRO_DELTA).")(fn)
    fn = click.option("--gamma", type=float, default=None, help="Explicit budget Γ.")(fn)
    fn = click.option("--norm", type=click.Choice(["inf", "one"]), default=None, help="Norm of the context ball.")(fn)
    fn = click.option("--context", required=True, help="Context JSON file ({\"x\": [...]}).")(fn)
    fn = click.option("--problem", required=True, help="Problem JSON file.")(fn)
    return fn


# ------------------------------------------------------------------------------
# SET GEOMETRY
# ------------------------------------------------------------------------------
@click.command("validate")
@click.option("--problem", required=True, help="Problem JSON file.")
def validate_cmd(problem):
    """
    Load and check a problem file; print its dimensions when it is consistent.
    """
    p = load_problem(problem)
    emit({"valid": True, "d_z": p.d_z, "d_u": p.d_u, "d_h": p.d_h, "S": p.scenarios.S, "d_x": p.scenarios.d_x})
    return EXIT_OK


@click.command("gamma0")
@click.option("--problem", required=True, help="Problem JSON file.")
@click.option("--context", required=True, help="Context JSON file.")
@click.option("--norm", type=click.Choice(["inf", "one"]), default=None, help="Norm of the context ball.")
def gamma0_cmd(problem, context, norm):
    """
    Print Γ₀, the distance from the context to the covariate hull (null if infinite).
    """
    p = load_problem(problem)
    q = _query(context, norm, None, None)
    emit(finite_or_none(gamma0(p.scenarios, q.x, q.norm)))
    return EXIT_OK


@click.command("ranges")
@context_options
def ranges_cmd(problem, context, norm, gamma, delta):
    """
    Print the per-coordinate extent of the conditioned set and whether it is a single point.
    """
    p = load_problem(problem)
    q = _query(context, norm, gamma, delta)
    budget = resolve_budget(p.scenarios, q)
    emit(coordinate_ranges(p.scenarios, q.x, budget.gamma, q.norm))
    return EXIT_OK


# ------------------------------------------------------------------------------
# ORACLE
# ------------------------------------------------------------------------------
@click.command("oracle")
@click.option("--method", type=click.Choice(sorted(ORACLE_METHODS)), default="d", help="Oracle formulation.")
@click.option("--z", "z_path", required=True, help="JSON file with the first-stage decision ({\"z\": [...]}).")
@context_options
def oracle_cmd(method, z_path, problem, context, norm, gamma, delta):
    """
    Evaluate the worst-case recourse value at a fixed first-stage decision.
    """
    p = load_problem(problem)
    q = _query(context, norm, gamma, delta)
    z = load_vector(z_path, "z")
    emit(ORACLE_METHODS[method](p, z, q))
    return EXIT_OK


# ------------------------------------------------------------------------------
# SOLVE
# ------------------------------------------------------------------------------
@click.command("solve")
@click.option("--master", type=click.Choice([k.value for k in MasterKind]), default=MasterKind.CONTEXTUAL.value)
@click.option("--oracle", "oracle_name", type=click.Choice(["d", "p"]), default="d", help="Oracle used by the loop.")
@click.option("--gap-tol", type=float, default=None, help="Relative stopping gap.")
@click.option("--max-iterations", type=int, default=None, help="Iteration cap.")
@click.option("--warm", "warm_path", default=None, help="Cut pool to start from.")
@click.option("--save-pool", "save_path", default=None, help="Write the grown cut pool here.")
@context_options
def solve_cmd(master, oracle_name, gap_tol, max_iterations, warm_path, save_path, problem, context, norm, gamma, delta):
    """
    Solve the two-stage problem for one context; exit 3 when the loop stops before the gap closes.
    """
    p = load_problem(problem)
    q = _query(context, norm, gamma, delta)
    if p.uncertainty_kind is UncertaintyKind.OBJECTIVE_Q:
        if warm_path or save_path:
            raise InputError("objective-uncertainty problems are solved in one LP and use no cut pool")
        emit(solve_objective_uncertainty(p, q))
        return EXIT_OK

    kind = MasterKind(master)
    if save_path and kind is not MasterKind.CONTEXTUAL:
        raise InputError("--save-pool needs the contextual master; scenario pools are not reusable")
    fields = {"master_kind": kind, "oracle": oracle_name}
    if gap_tol is not None:
        fields["gap_tol"] = gap_tol
    if max_iterations is not None:
        fields["max_iterations"] = max_iterations
    try:
        opts = CcgOptions(**fields)
    except ValueError as exc:
        raise InputError(f"invalid solver options: {exc}") from None

    if warm_path:
        pool = pool_load(warm_path, p)
        solution, found = warm_start_solve(p, q, pool, opts)
    else:
        solution, found = solve_ccg(p, q, opts)
    if save_path:
        pool_save(found, save_path)
        logger.info(f"[solve] saved {len(found)} cut(s) to {save_path}")
    emit(solution)
    if solution.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK if solution.is_optimal else EXIT_LIMIT


# ------------------------------------------------------------------------------
# POOL
# ------------------------------------------------------------------------------
@click.group()
def pool_cli():
    """
    Cut-pool maintenance.
    """
    pass


@pool_cli.command("merge")
@click.argument("pools", nargs=-1, required=True)
@click.option("--out", required=True, help="Merged pool file.")
@click.option("--problem", default=None, help="Problem JSON file; re-checks every π against it.")
def merge_cmd(pools, out, problem):
    """
    Union of several pools built for the same (W, q).
    """
    p = load_problem(problem) if problem else None
    merged = pool_load(pools[0], p)
    for path in pools[1:]:
        merged = merged.merge(pool_load(path, p))
    pool_save(merged, out)
    emit({"fingerprint": merged.fingerprint, "entries": len(merged)})
    return EXIT_OK
