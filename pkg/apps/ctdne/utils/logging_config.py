#!/usr/bin/env python3
"""
Centralized logging setup for ctdne.

Console output goes to stderr so stdout stays free for the JSON run manifest.
"""

import logging
import os
import sys
from typing import Optional, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_configured = False


def setup_logging(
    application: str = "ctdne",
    level: Optional[Union[int, str]] = None,
    include_console: bool = True,
) -> None:
    """
    Configure the root logger once per process.

    Args:
        application: Name recorded on the application logger.
        level: Log level; defaults to the LOG_LEVEL environment variable (INFO).
        include_console: Attach a stderr handler.
    """
    global _configured

    if level is None:
        level = os.getenv("LOG_LEVEL", "INFO")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    root = logging.getLogger()
    root.setLevel(level)

    if not _configured and include_console:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    _configured = True

    logging.getLogger(application).debug(f"Logging configured for {application} at level {logging.getLevelName(level)}")
