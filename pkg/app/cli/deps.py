## Shared pieces of the CLI verbs: common options, config loading, report rendering
## and the mapping from errors to exit status.
import functools
import logging
import math
from typing import Callable

import click
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

from app.core.config_file import RunConfig, load_run_config
from app.core.errors import ConfigError, FentropyBaseError, InternalError
from app.core.models import EntropyReport, VerificationReport
from app.core.verification import VerificationService

logger = logging.getLogger(__name__)
console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class RunContext(BaseModel):
    """A loaded config with the command-line overrides applied."""

    config: RunConfig
    config_hash: str | None
    n_max: int | None
    tol: float
    seed: int
    log2: bool
    as_json: bool

    @property
    def service(self) -> VerificationService:
        return VerificationService(tol=self.tol, n_max=self.n_max)

    @property
    def display_factor(self) -> float:
        return 1 / math.log(2) if self.log2 else 1.0


def run_options(func: Callable) -> Callable:
    """--config, --n-max, --tol, --log2, --seed and --json, shared by every verb."""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None),
        click.option("--n-max", type=click.IntRange(0, 8), default=None, help="Largest ball radius"),
        click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None),
        click.option("--log2", is_flag=True, default=False, help="Display values in bits"),
        click.option("--seed", type=click.IntRange(min=0), default=None),
        click.option("--json", "as_json", is_flag=True, default=False, help="Print one JSON document"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_context(
    verb: str,
    config_path: str | None,
    n_max: int | None,
    tol: float | None,
    log2: bool,
    seed: int | None,
    as_json: bool,
) -> RunContext:
    if config_path is None:
        config, digest = RunConfig(), None
    else:
        config, digest = load_run_config(config_path)
    if config.command is not None and config.command != verb:
        raise ConfigError(f"config was written for `{config.command}`, not `{verb}`")
    options = config.options
    return RunContext(
        config=config,
        config_hash=digest,
        n_max=options.n_max if n_max is None else n_max,
        tol=options.tol if tol is None else tol,
        seed=options.seed if seed is None else seed,
        log2=options.log2 or log2,
        as_json=as_json,
    )


def exit_on_error(func: Callable) -> Callable:
    """Input errors exit with 2, internal errors with 1; the error class name is printed."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InternalError as e:
            logger.error(f"Internal error: {e}")
            err_console.print(f"[red]InternalError[/red]: {e}")
            raise SystemExit(EXIT_FAILED)
        except FentropyBaseError as e:
            err_console.print(f"[red]{type(e).__name__}[/red]: {e}")
            raise SystemExit(EXIT_INPUT)
        except ValidationError as e:
            err_console.print(f"[red]ValidationError[/red]: {e}")
            raise SystemExit(EXIT_INPUT)

    return wrapper


def emit_json(document: BaseModel) -> None:
    click.echo(document.model_dump_json(indent=2))


def render_entropy(report: EntropyReport, log2: bool, finite: bool = False) -> None:
    """The stabilized row only means something for actions on finite sets."""
    unit = "bits" if log2 else "nats"
    table = Table(title=f"f-invariant entropy ({unit})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("value", f"{report.value:.7f}")
    table.add_row("H(β)", f"{report.base_entropy:.7f}")
    for term in report.terms:
        table.add_row(f"H({term.generator}·β ∨ β)", f"{term.joint_entropy:.7f}")
    table.add_row("sequence", ", ".join(f"{v:.7f}" for v in report.sequence))
    if finite:
        table.add_row("stabilized", str(report.stabilized))
    console.print(table)


def render_verification(report: VerificationReport) -> None:
    table = Table(title=f"{report.command} ({report.passed} passed, {report.failed} failed)")
    for column in ("check", "lhs", "rhs", "tol", "result", "statement"):
        table.add_column(column)
    for r in report.records:
        table.add_row(
            r.name,
            _fmt(r.lhs),
            _fmt(r.rhs),
            f"{r.tolerance:.1e}",
            "[green]pass[/green]" if r.passed else "[red]FAIL[/red]",
            r.anchor,
        )
    console.print(table)
    for key, value in report.details.items():
        console.print(f"{key}: {_fmt(value)}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.7f}"
    if isinstance(value, list):
        return "[" + ", ".join(map(str, value)) + "]"
    return str(value)


def finish(report: VerificationReport, ctx: RunContext) -> None:
    """Print a verification report and exit with its status."""
    shown = report.rescaled(ctx.display_factor) if ctx.log2 else report
    if ctx.as_json:
        emit_json(shown)
    else:
        render_verification(shown)
    raise SystemExit(report.exit_status)
