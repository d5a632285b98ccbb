# sphereview/core/logging_config.py

import logging
from logging.config import dictConfig
from typing import Optional

from sphereview.core.config import LOG_LEVEL_NAMES, settings

LOG_FORMAT = "%(levelname)-8s | %(asctime)s | %(name)-25s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def build_logging_config(level: str) -> dict:
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "default": {
                "format": LOG_FORMAT,
                "datefmt": DATE_FORMAT,
            },
        },
        "handlers": {
            "default": {
                "formatter": "default",
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
            },
        },
        "loggers": {
            "sphereview": {
                "handlers": ["default"],
                "level": level,
                "propagate": False,
            },
            "py.warnings": {
                "handlers": ["default"],
                "level": "WARNING",
                "propagate": False,
            },
        },
    }


def setup_logging(level: Optional[str] = None):
    level_name = (level or settings.LOG_LEVEL).upper()
    if level_name not in LOG_LEVEL_NAMES:
        level_name = "INFO"
    dictConfig(build_logging_config(level_name))
    logging.captureWarnings(True)
    logger = logging.getLogger("sphereview.core.logging_config")
    logger.debug(f"Logging setup complete (level {level_name}).")
