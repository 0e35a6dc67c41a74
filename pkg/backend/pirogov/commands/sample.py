"""sample: JSON Lines stream of draws."""

import click

from pirogov.commands.common import execute, model_options, pass_params


@click.command("sample")
@model_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=1, show_default=True, help="Number of draws")
@click.option("--exact", is_flag=True, default=False, help="Exact samplers (verification scale)")
@click.option("--floor-constant", type=float, default=None, help="Torus: c in the epsilon floor e^(-c n)")
@pass_params
def sample(params):
    """Draw polymer sets or spin configurations with the self-reducible samplers."""
    execute("sample", params)
