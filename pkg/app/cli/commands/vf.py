import click

from app.cli.deps import exit_on_error, finish, load_context, run_options
from app.core.config_file import build_measure


@click.command("vf")
@run_options
@exit_on_error
def vf(config_path, n_max, tol, log2, seed, as_json):
    """
    Virtual f-invariant entropy of the measure, from r(G) or a graph of finite groups.
    """
    ctx = load_context("vf", config_path, n_max, tol, log2, seed, as_json)
    measure = build_measure(ctx.config.require_measure())
    report = ctx.service.vf(measure, ctx.config.require_vf(), config_hash=ctx.config_hash)
    finish(report, ctx)
