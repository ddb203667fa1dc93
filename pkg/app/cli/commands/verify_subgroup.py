import click

from app.cli.deps import exit_on_error, finish, load_context, run_options
from app.core.config_file import build_action, build_measure


@click.command("verify-subgroup")
@run_options
@exit_on_error
def verify_subgroup(config_path, n_max, tol, log2, seed, as_json):
    """
    Check f_H = |G : H| · f_G for the measure and coset action in the config.
    """
    ctx = load_context("verify-subgroup", config_path, n_max, tol, log2, seed, as_json)
    measure = build_measure(ctx.config.require_measure())
    act = build_action(ctx.config.require_action(), measure.rank)
    report = ctx.service.verify_subgroup(measure, act, config_hash=ctx.config_hash, seed=ctx.seed)
    finish(report, ctx)
