import click

from app.cli.deps import exit_on_error, finish, load_context, run_options


@click.command("verify-identities")
@click.option("--rank", type=int, default=2, show_default=True)
@click.option("--radius", type=int, default=2, show_default=True)
@click.option("--count", type=int, default=50, show_default=True, help="Random instances per identity")
@run_options
@exit_on_error
def verify_identities(rank, radius, count, config_path, n_max, tol, log2, seed, as_json):
    """
    Check the exact counting identities of the Cayley tree on seeded random instances.
    """
    ctx = load_context("verify-identities", config_path, n_max, tol, log2, seed, as_json)
    report = ctx.service.verify_identities(rank=rank, radius=radius, seed=ctx.seed, count=count)
    report.config_hash = ctx.config_hash
    finish(report, ctx)
