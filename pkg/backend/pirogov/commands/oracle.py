"""oracle: brute-force partition functions."""

import click

from pirogov.commands.common import execute, model_options, pass_params


@click.command("oracle")
@model_options
@pass_params
def oracle(params):
    """Exact polynomial and value by exhaustive enumeration (artifact tagged exact)."""
    execute("oracle", params)
