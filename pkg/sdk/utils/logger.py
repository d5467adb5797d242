# sdk/utils/logger.py
import copy
import logging
import logging.config
from typing import Optional

DEFAULT_LOGGING_DICT = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "std": {"format": "%(name)s: %(message)s", "datefmt": "[%X]"}
    },
    "handlers": {
        "console": {
            "()": "sdk.utils.logger.stderr_rich_handler",
            "level": "DEBUG",
            "formatter": "std",
        }
    },
    "loggers": {
        "ddcro": {"level": "INFO", "handlers": ["console"], "propagate": False}
    },
}


def stderr_rich_handler() -> logging.Handler:
    """Rich console handler writing to stderr; stdout is reserved for JSON output."""
    from rich.console import Console
    from rich.logging import RichHandler

    return RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
        markup=False,
    )


def init_logging(level: str = "INFO", custom_config: Optional[dict] = None) -> None:
    """
    Configure the `ddcro` logger tree.

    Args:
        level (str): Level for the `ddcro` logger (e.g. "DEBUG", "INFO").
        custom_config (dict, optional): Top-level keys that replace the
            matching sections of DEFAULT_LOGGING_DICT.
    """
    config = copy.deepcopy(DEFAULT_LOGGING_DICT)
    config["loggers"]["ddcro"]["level"] = level
    if custom_config:
        for key, section in custom_config.items():
            if isinstance(section, dict) and isinstance(config.get(key), dict):
                config[key].update(section)
            else:
                config[key] = section
    logging.config.dictConfig(config)
