"""
Options and error handling shared by the CLI commands.

Errors are reported on stderr as one JSON object with a machine-readable
code; the process exits with the code carried by the exception.
"""

import functools
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, Optional

import click
from pydantic import ValidationError

from pirogov.core.config import clear_settings_cache, get_settings
from pirogov.core.exceptions import ConfigurationError, PirogovError
from pirogov.core.logging_config import configure_logging
from pirogov.schemas.run_config import MODELS, RunConfig
from pirogov.services.run_service import RunService

logger = logging.getLogger(__name__)

EXIT_VALIDATION = ConfigurationError.exit_code


def model_options(func: Callable) -> Callable:
    """Model, geometry and parameter flags common to count, sample and oracle."""
    options = [
        click.option("--model", "model", type=click.Choice(MODELS), required=True, help="Model instance"),
        click.option("--q", type=int, default=None, help="Number of Potts colours"),
        click.option("--dim", type=int, default=2, show_default=True, help="Dimension for torus runs"),
        click.option("--geometry", type=click.Choice(["free", "torus"]), default="free", show_default=True),
        click.option("--region", "region_file", type=click.Path(dir_okay=False), default=None, help="Region JSON file"),
        click.option("--n", type=int, default=None, help="Torus side"),
        click.option("--boundary", type=str, default=None, help="Boundary ground state (colour name or even/odd)"),
        click.option("--z", type=float, default=None, help="Activity"),
        click.option("--beta", type=float, default=None, help="Inverse temperature"),
        click.option("--lambda", "lam", type=float, default=None, help="Hard-core fugacity"),
        click.option("--delta", type=float, default=None, help="Zero-free radius override"),
        click.option("--epsilon", type=float, default=None, help="Relative error or TV target"),
        click.option("--engine", type=click.Choice(["auto", "cluster", "newton"]), default=None),
        click.option("--threads", type=int, default=None, help="Worker threads (0 = all cores)"),
        click.option("--out", "output", type=click.Path(dir_okay=False), default=None, help="Artifact path"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def report_error(code: str, message: str, exit_code: int) -> None:
    click.echo(json.dumps({"error": code, "message": message}, sort_keys=True), err=True)
    sys.exit(exit_code)


def build_config(command: str, params: Dict[str, Any]) -> RunConfig:
    values = {k: v for k, v in params.items() if v is not None}
    return RunConfig(command=command, **values)


def execute(command: str, params: Dict[str, Any]) -> None:
    """Validate, run and print (or write) the artifact of one command."""
    try:
        config = build_config(command, params)
        text = RunService(config).run()
    except ValidationError as exc:
        report_error("validation", str(exc), EXIT_VALIDATION)
        return
    except PirogovError as exc:
        logger.debug("run failed", exc_info=True)
        report_error(exc.code, str(exc), exc.exit_code)
        return
    if config.output is None:
        click.echo(text, nl=False)


def setup(log_level: Optional[str]) -> None:
    """Apply the --log-level flag and install the logging handler."""
    if log_level is not None:
        os.environ["PIROGOV_LOG_LEVEL"] = log_level
    clear_settings_cache()
    try:
        configure_logging(get_settings())
    except ConfigurationError as exc:
        report_error(exc.code, str(exc), exc.exit_code)


def pass_params(func: Callable) -> Callable:
    """Collect every click parameter into one dict for ``execute``."""
    @functools.wraps(func)
    def wrapper(**params):
        return func(params)

    return wrapper
