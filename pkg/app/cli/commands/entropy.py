import click

from app.cli.deps import emit_json, exit_on_error, load_context, render_entropy, run_options
from app.core.config_file import build_measure
from app.core.measures import FiniteAction


@click.command("entropy")
@run_options
@exit_on_error
def entropy(config_path, n_max, tol, log2, seed, as_json):
    """
    Compute the f-invariant entropy of the measure in the config.
    """
    ctx = load_context("entropy", config_path, n_max, tol, log2, seed, as_json)
    measure = build_measure(ctx.config.require_measure())
    report = ctx.service.entropy(measure).model_copy(update={"config_hash": ctx.config_hash})
    if ctx.log2:
        report = report.rescaled(ctx.display_factor)

    if ctx.as_json:
        emit_json(report)
    else:
        render_entropy(report, ctx.log2, finite=isinstance(measure, FiniteAction))
