#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Logging utility for the Ising toolkit
Every module logs under the `ising_toolkit` hierarchy; console output goes to stderr
so that CSV bodies written to stdout stay clean.
"""

import logging
import os
import sys
from typing import TYPE_CHECKING, List, Optional

if TYPE_CHECKING:
    from ..config import Settings

ROOT_LOGGER_NAME = "ising_toolkit"
DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s'


def _build_handlers(log_file: Optional[str]) -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8', mode='a'))
    return handlers


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    format_string: Optional[str] = None
) -> logging.Logger:
    """
    Configure the toolkit root logger, replacing any handlers from an earlier call

    Args:
        level: Level name; unknown names fall back to INFO
        log_file: Optional file that receives the same records as stderr
        format_string: Optional custom format string

    Returns:
        The configured `ising_toolkit` logger
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    formatter = logging.Formatter(format_string or DEFAULT_FORMAT)

    root = logging.getLogger(ROOT_LOGGER_NAME)
    root.setLevel(numeric_level)
    root.propagate = False
    for handler in list(root.handlers):
        handler.close()
    root.handlers.clear()

    for handler in _build_handlers(log_file):
        handler.setLevel(numeric_level)
        handler.setFormatter(formatter)
        root.addHandler(handler)

    root.debug(f"Logging initialized - Level: {level}, File: {log_file}")
    return root


def configure_from_settings(settings: "Settings", level: Optional[str] = None) -> logging.Logger:
    """Apply LOG_LEVEL / LOG_FILE from settings; an explicit level wins over LOG_LEVEL"""
    return setup_logging(level=level or settings.LOG_LEVEL, log_file=settings.LOG_FILE)


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get a logger below the toolkit root

    Args:
        name: Module name; None returns the root logger itself
    """
    if name:
        return logging.getLogger(f'{ROOT_LOGGER_NAME}.{name}')
    return logging.getLogger(ROOT_LOGGER_NAME)
