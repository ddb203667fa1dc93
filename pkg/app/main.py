import click

from app.cli.main import register
from app.config import settings
from app.util import setup_logging


@click.group(name="fentropy", help=f"{settings.PROJECT_NAME}: f-invariant entropy for free group actions")
def cli():
    setup_logging()


register(cli)


if __name__ == "__main__":
    cli()
