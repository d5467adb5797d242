# sdk/cli/main.py

import json
import os
import sys
from typing import List, Optional

import click
import yaml

from sdk.cli.energy_cli import energy_cli
from sdk.cli.problem_cli import gamma0_cmd, oracle_cmd, pool_cli, ranges_cmd, solve_cmd, validate_cmd
from sdk.config.settings import logger
from sdk.core.exceptions import EXIT_INPUT, EXIT_OK, DdcroError, InputError, NotFoundError
from sdk.core.problem_io import read_json
from sdk.utils.logger import init_logging
from sdk.version import __version__


def _read_config(path: str) -> dict:
    """JSON or YAML file whose nesting mirrors the command tree, e.g. {"solve": {"master": "classical"}}."""
    if path.endswith((".yaml", ".yml")):
        if not os.path.isfile(path):
            raise NotFoundError(f"file not found: {path}", {"path": path})
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise InputError(f"{path}: invalid YAML ({exc})", {"path": path}) from None
    else:
        data = read_json(path)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a mapping", {"path": path})
    return data


def _load_config(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> None:
    if value is None:
        return
    defaults = _read_config(value)
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    logger.debug(f"[config] defaults from {value}: {sorted(defaults)}")


@click.group()
@click.option(
    "--config",
    type=str,
    default=None,
    is_eager=True,
    expose_value=False,
    callback=_load_config,
    help="JSON or YAML file of option defaults (explicit flags win).",
)
@click.option("--verbose", "-v", is_flag=True, default=False, help="Debug logging on stderr.")
def cli(verbose):
    """
    ddcro: data-driven contextual robust optimization.

    Results are printed as JSON on stdout; logs go to stderr.
    """
    if verbose:
        init_logging("DEBUG")


cli.add_command(validate_cmd, name="validate")
cli.add_command(gamma0_cmd, name="gamma0")
cli.add_command(ranges_cmd, name="ranges")
cli.add_command(oracle_cmd, name="oracle")
cli.add_command(solve_cmd, name="solve")
cli.add_command(pool_cli, name="pool")
cli.add_command(energy_cli, name="energy")


@cli.command("version")
def version_cmd():
    click.echo(__version__)


def _emit_error(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    sys.stderr.flush()


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and return the process exit code.

    0 success, 1 input error, 2 infeasible, 3 iteration or node limit. Every
    failure also writes one JSON object on stderr.
    """
    try:
        rv = cli.main(args=argv, prog_name="ddcro", standalone_mode=False)
    except DdcroError as exc:
        _emit_error(exc.to_dict())
        return exc.exit_code
    except click.ClickException as exc:
        _emit_error({"error": "usage", "message": exc.format_message()})
        return EXIT_INPUT
    except click.exceptions.Abort:
        _emit_error({"error": "aborted", "message": "aborted"})
        return EXIT_INPUT
    if isinstance(rv, int):
        return rv
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
