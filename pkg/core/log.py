"""Console logging for the command line; library modules only call ``logging.getLogger(__name__)``."""
from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler


def configure(verbose: bool = False) -> logging.Logger:
    logger = logging.getLogger("core")
    handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False
    return logger
