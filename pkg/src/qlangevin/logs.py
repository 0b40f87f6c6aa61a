"""Logger Module for qlangevin"""

import logging

from qlangevin.config import Settings, get_settings
from qlangevin.errors import ValidationError

ROOT_LOGGER_NAME = "qlangevin"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_logger(name: str = ROOT_LOGGER_NAME) -> logging.Logger:
    """
    Returns a logger under the package root logger.

    The root logger gets a single stream handler the first time any module asks
    for a logger; its level comes from the QLANGEVIN_LOG_LEVEL setting, or the
    default level while that setting is invalid.

    :param name: Dotted logger name, usually the calling module's __name__.
    :return: The configured logger.
    """
    root = logging.getLogger(ROOT_LOGGER_NAME)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        try:
            level = get_settings().log_level
        except ValidationError:
            level = Settings.log_level
        root.setLevel(level)

    if name != ROOT_LOGGER_NAME and not name.startswith(ROOT_LOGGER_NAME + "."):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)


def set_level(level: str) -> None:
    """Overrides the package log level, e.g. from a CLI flag."""
    logging.getLogger(ROOT_LOGGER_NAME).setLevel(level.upper())
