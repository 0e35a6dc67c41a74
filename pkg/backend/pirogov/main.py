"""
pirogov command-line entry point.

Assembles the click group from the command modules.
"""

import click

from pirogov import __version__
from pirogov.commands.common import setup
from pirogov.commands.count import count
from pirogov.commands.oracle import oracle
from pirogov.commands.sample import sample
from pirogov.commands.verify import verify


@click.group()
@click.version_option(__version__, prog_name="pirogov")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Overrides PIROGOV_LOG_LEVEL")
def cli(log_level):
    """Cluster-expansion counting and sampling for polymer and contour models."""
    setup(log_level.upper() if log_level else None)


cli.add_command(count)
cli.add_command(sample)
cli.add_command(oracle)
cli.add_command(verify)


if __name__ == "__main__":
    cli()
