import click

from app.cli.deps import (
    console,
    emit_json,
    exit_on_error,
    load_context,
    render_verification,
    run_options,
)
from app.core.config_file import build_measure
from app.core.models import ApproxResult, MarkovDocument


@click.command("approx")
@run_options
@exit_on_error
def approx(config_path, n_max, tol, log2, seed, as_json):
    """
    Build the Markov approximation of the measure in the config from its pair marginals.
    """
    ctx = load_context("approx", config_path, n_max, tol, log2, seed, as_json)
    measure = build_measure(ctx.config.require_measure())
    document, report = ctx.service.approx(measure, config_hash=ctx.config_hash)
    shown = report.rescaled(ctx.display_factor) if ctx.log2 else report

    if ctx.as_json:
        emit_json(ApproxResult(measure=document, report=shown))
    else:
        render_document(document)
        render_verification(shown)
    raise SystemExit(report.exit_status)


def render_document(document: MarkovDocument) -> None:
    console.print(f"pi = {[round(p, 7) for p in document.pi]}")
    for name, matrix in document.P.items():
        console.print(f"P_{name} = {[[round(x, 7) for x in row] for row in matrix]}")
