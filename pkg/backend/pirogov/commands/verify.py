"""verify: desk-scale acceptance suites."""

import json
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from pirogov.commands.common import report_error
from pirogov.core.exceptions import PirogovError
from pirogov.schemas.artifacts import VerifyReport
from pirogov.services.verification_service import SUITE_NAMES, VerificationService


def render_table(report: VerifyReport) -> Table:
    table = Table(title="pirogov verify")
    table.add_column("suite")
    table.add_column("checks", justify="right")
    table.add_column("result")
    table.add_column("first failure")
    for suite in report.suites:
        status = "[green]pass[/green]" if suite.passed else "[red]FAIL[/red]"
        table.add_row(suite.name, str(suite.checks), status, suite.failures[0] if suite.failures else "")
    return table


@click.command("verify")
@click.option("--suite", "suites", multiple=True, type=click.Choice(SUITE_NAMES + ("all",)), default=("all",),
              show_default=True, help="Suite to run (repeatable)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--draws", type=int, default=4000, show_default=True, help="Draws per empirical sampler check")
@click.option("--out", "output", type=click.Path(dir_okay=False), default=None, help="JSON report path")
def verify(suites, seed, draws, output):
    """Run verification suites against the brute-force oracles."""
    try:
        report = VerificationService(seed, draws).run(suites)
    except PirogovError as exc:
        report_error(exc.code, str(exc), exc.exit_code)
        return
    Console(stderr=output is None).print(render_table(report))
    text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
    if output is not None:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    if not report.passed:
        sys.exit(1)
