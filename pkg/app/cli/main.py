import click

from app.cli.commands import approx, entropy, verify_identities, verify_subgroup, vf

commands: list[click.Command] = [
    entropy.entropy,
    verify_subgroup.verify_subgroup,
    verify_identities.verify_identities,
    approx.approx,
    vf.vf,
]


def register(group: click.Group) -> None:
    for command in commands:
        group.add_command(command)
