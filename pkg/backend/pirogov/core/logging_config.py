"""
Logging setup for pirogov.

Modules log through ``logging.getLogger(__name__)``; this module attaches
a single handler to the package logger, using a JSON formatter when
``log_format`` is ``json``.
"""

import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

from pirogov.core.config import Settings, get_settings

PACKAGE_LOGGER = "pirogov"
TEXT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
JSON_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(settings: Optional[Settings] = None) -> logging.Logger:
    """
    Configure the package logger from settings.

    Logs go to stderr so that JSON artifacts written to stdout stay clean.
    Calling this twice replaces the previous handler.

    Args:
        settings: Settings to read level and format from (defaults to get_settings())

    Returns:
        logging.Logger: The configured package logger
    """
    settings = settings or get_settings()
    logger = logging.getLogger(PACKAGE_LOGGER)

    for handler in list(logger.handlers):
        if getattr(handler, "_pirogov_handler", False):
            logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    if settings.log_format == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))
    handler._pirogov_handler = True

    logger.addHandler(handler)
    logger.setLevel(settings.log_level)
    logger.propagate = False
    return logger
