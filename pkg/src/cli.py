"""Command-line surface: simulate, exact, constants, verify, report."""
from __future__ import annotations

import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import click

from src.config import Config, load_config
from src.errors import PreconditionError, VerificationError, WalkLabError
from src.logs import get_logger

logger = get_logger(__name__)


def _count(value: Any) -> Optional[int]:
    """Integer counts given as "1000000" or "1e6"."""
    if value is None or isinstance(value, int):
        return value
    try:
        number = float(value)
    except ValueError as exc:
        raise click.BadParameter(f"not a number: {value!r}") from exc
    if not number.is_integer():
        raise click.BadParameter(f"not an integer: {value!r}")
    return int(number)


def _seed(value: Any) -> Optional[int]:
    if value is None:
        return None
    try:
        seed = int(value)
    except ValueError as exc:
        raise click.BadParameter(f"seeds are unsigned 64-bit decimals, got {value!r}") from exc
    if not 0 <= seed < 2 ** 64:
        raise click.BadParameter(f"seed out of range: {value}")
    return seed


def _tolerances(values: Sequence[str]) -> Optional[Dict[str, str]]:
    out = {}
    for item in values:
        key, sep, value = item.partition("=")
        if not sep:
            raise click.BadParameter(f"tolerance overrides look like key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out or None


def _apply_log_level(level: Optional[str]) -> None:
    if not level:
        return
    level = level.upper()
    logging.basicConfig(level=level)
    for name in list(logging.root.manager.loggerDict):
        if name == "src" or name.startswith("src."):
            logging.getLogger(name).setLevel(level)


def _config_options(func):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON config file; flags override its values."),
        click.option("--alpha", type=float, default=None, help="Return-force exponent."),
        click.option("--n", "n", default=None, help="Horizon (accepts 1e6)."),
        click.option("--replicas", default=None, help="Number of replicas."),
        click.option("--seed", default=None, help="Base seed (unsigned 64-bit decimal)."),
        click.option("--R", "R", default=None, help="Truncation radius of the exact solvers."),
        click.option("--T", "T", default=None, help="Time horizon of the exact solvers."),
        click.option("--output-dir", default=None, help="Artifact directory."),
        click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default=None),
        click.option("--jobs", type=int, default=None, help="Worker processes (results do not depend on it)."),
        click.option("--allow-subcritical/--no-allow-subcritical", default=None,
                     help="Allow alpha <= 3 for verify and constants."),
        click.option("--functional", "functionals", multiple=True, help="Functional id (repeatable)."),
        click.option("--tolerance", "tolerances", multiple=True, help="Tolerance override key=value (repeatable)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _resolve(config_path: Optional[str], **flags: Any) -> Config:
    overrides = {
        "alpha": flags.get("alpha"),
        "n": _count(flags.get("n")),
        "replicas": _count(flags.get("replicas")),
        "seed": _seed(flags.get("seed")),
        "R": _count(flags.get("R")),
        "T": _count(flags.get("T")),
        "output_dir": flags.get("output_dir"),
        "output_format": flags.get("output_format"),
        "jobs": flags.get("jobs"),
        "allow_subcritical": flags.get("allow_subcritical"),
        "functionals": list(flags["functionals"]) if flags.get("functionals") else None,
        "tolerances": _tolerances(flags.get("tolerances") or ()),
    }
    return load_config(config_path, overrides)


def _written(status: Dict[str, Any]) -> str:
    if status.get("status") != "success":
        raise WalkLabError(status.get("message", "artifact write failed"))
    click.echo(f"wrote {', '.join(status.get('paths') or [status['path']])}")
    return status["path"]


@click.group()
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING...")
def cli(log_level: Optional[str]):
    """Laboratory for the simple random walk on Z^2 pulled back to the origin on the axes."""
    _apply_log_level(log_level)


@cli.command()
@_config_options
def simulate(config_path, **flags):
    """Run a replicated campaign and write its estimate report."""
    from src.lab.campaign import Campaign, replicate
    from src.lab.empirical import empirical_invariants
    from src.tools.artifacts import write_artifact
    from src.walk.lattice import WalkParams

    config = _resolve(config_path, **flags)
    campaign = Campaign(
        params=WalkParams(alpha=config.alpha),
        n=config.n,
        replicas=config.replicas,
        base_seed=config.require_seed("simulate"),
        functionals=tuple(config.functionals),
    )
    report = replicate(campaign, config.jobs)
    result = report.to_dict()
    result["estimate_rows"] = report.estimate_rows()
    tables = {
        "estimates": {
            "header": ["estimator", "mean", "stderr", "half_width", "replicas"],
            "rows": [[r["estimator"], r["mean"], r["stderr"], r["half_width"], r["replicas"]]
                     for r in report.estimate_rows()],
        }
    }
    try:
        emp = empirical_invariants(report, min_count=config.tolerances.min_shell_count)
    except PreconditionError as exc:
        logger.warning("empirical invariant laws skipped: %s", exc)
    else:
        result["empirical"] = emp.to_dict()
        tables["entry_measure"] = {"header": ["x1", "x2", "mass"], "rows": emp.entry.to_rows()}
        tables["exit_measure"] = {"header": ["x1", "x2", "mass"], "rows": emp.exit.to_rows()}
    _written(write_artifact(config.output_dir, "simulate", "simulate", config.artifact_view(), result,
                            config.output_format, tables))
    for row in report.estimate_rows():
        click.echo(f"{row['estimator']:<40} {row['mean']:.6g} +- {row['stderr']:.2g}")


@cli.command(context_settings={"ignore_unknown_options": True, "allow_extra_args": True})
@click.argument("operation")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--output-dir", default=None)
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default=None)
@click.pass_context
def exact(ctx, operation, config_path, output_dir, output_format):
    """Run a named exact or asymptotic operation: exact OPERATION --arg value ..."""
    from src.tools.artifacts import write_artifact
    from src.tools.operations import run_operation

    config = load_config(config_path, {"output_dir": output_dir, "output_format": output_format})
    arguments = _operation_arguments(ctx.args)
    outcome = run_operation(operation, arguments)
    if outcome["status"] != "success":
        if outcome.get("kind") == "precondition":
            raise PreconditionError(outcome["message"])
        raise WalkLabError(outcome["message"])
    result = {k: outcome[k] for k in ("operation", "arguments", "result")}
    name = "exact_" + outcome["operation"].replace("-", "_")
    _written(write_artifact(config.output_dir, name, "exact", config.artifact_view(), result, config.output_format))


def _operation_arguments(args: List[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--"):
            raise PreconditionError(f"unexpected argument {token!r}; use --name value")
        key, sep, value = token[2:].partition("=")
        if not sep:
            if i + 1 >= len(args):
                raise PreconditionError(f"missing value for --{key}")
            i += 1
            value = args[i]
        out[key.replace("-", "_")] = value
        i += 1
    return out


@cli.command(name="constants")
@_config_options
def constants_command(config_path, **flags):
    """Write the limit constants for (alpha, R)."""
    from src.exact.constants import constants
    from src.tools.artifacts import write_artifact

    config = _resolve(config_path, **flags)
    config.require_supercritical("constants")
    tol = config.tolerances
    result = constants(config.alpha, config.R, config.functionals, tol.power_tol, tol.power_max_iter,
                       config.allow_subcritical)
    _written(write_artifact(config.output_dir, "constants", "constants", config.artifact_view(), result,
                            config.output_format))
    for key in ("c0", "c1", "c2", "c", "c_prime"):
        click.echo(f"{key:<8} {result[key]:.10g}")


@cli.command()
@_config_options
@click.option("--check", "checks", multiple=True, help="Run only these checks (repeatable).")
def verify(config_path, checks, **flags):
    """Run the verification suite and write the pass/fail table."""
    from src.tools.artifacts import write_artifact
    from src.verify import run_verification

    config = _resolve(config_path, **flags)
    config.require_supercritical("verify")
    config.require_seed("verify")
    report = run_verification(config, checks or None)
    result = report.to_dict()
    table = {
        "checks": {
            "header": ["id", "passed", "value", "target"],
            "rows": [[c.id, c.passed, c.value, c.target] for c in report.checks],
        }
    }
    _written(write_artifact(config.output_dir, "verify", "verify", config.artifact_view(), result,
                            config.output_format, table))
    for c in report.checks:
        click.echo(f"{'PASS' if c.passed else 'FAIL'}  {c.id:<24} {c.title}")
    if not report.passed:
        raise VerificationError(report.failed)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--output-dir", default=None)
def report(config_path, output_dir):
    """Merge the artifacts of the output directory into summary.json and summary.csv."""
    from src.tools.artifacts import merge_reports

    config = load_config(config_path, {"output_dir": output_dir})
    status = merge_reports(config.output_dir, config.artifact_view())
    _written(status)
    click.echo(f"merged {status['artifacts']} artifacts, {status['rows']} rows")


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and map failures to exit codes: 1 precondition, 2 verification."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="walklab", standalone_mode=False)
    except VerificationError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except WalkLabError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
