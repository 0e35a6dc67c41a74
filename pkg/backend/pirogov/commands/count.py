"""count: approximate partition functions."""

import click

from pirogov.commands.common import execute, model_options, pass_params


@click.command("count")
@model_options
@click.option("--m", type=int, default=None, help="Truncation order override")
@click.option("--force", is_flag=True, default=False, help="Run even when |z| >= delta (no error guarantee)")
@click.option("--backend", type=click.Choice(["exact", "float"]), default="exact", show_default=True,
              help="Coefficient format in the artifact")
@click.option("--cluster-method", type=click.Choice(["growth", "trees"]), default=None)
@click.option("--exact-big", is_flag=True, default=False, help="Torus: also report the exact large-contour term")
@click.option("--floor-constant", type=float, default=None, help="Torus: c in the epsilon floor e^(-c n)")
@pass_params
def count(params):
    """Approximate Z by exp(T_m) of the truncated cluster expansion."""
    execute("count", params)
