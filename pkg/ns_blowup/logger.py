"""Logging configuration for NS Blowup."""

import logging
import sys
from pathlib import Path

ROOT_LOGGER_NAME = 'ns_blowup'


def setup_logging(log_level=logging.INFO, log_file=None):
    """Setup logging configuration.

    Console output goes to stderr so CSV written to stdout stays clean.
    Calling this twice replaces the handlers instead of stacking them.

    Args:
        log_level: Logging level (default: INFO)
        log_file: Optional log file path

    Returns:
        The package root logger
    """
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    root_logger.setLevel(logging.DEBUG if log_file else log_level)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)  # Always log DEBUG to file
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name):
    """Get a logger for a specific module.

    Args:
        name: Short module name ('solver', 'analysis.spectral', ...)

    Returns:
        logging.Logger instance
    """
    return logging.getLogger(f'{ROOT_LOGGER_NAME}.{name}')
