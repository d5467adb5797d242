# tests/utils/test_logger.py

import logging

from rich.logging import RichHandler

from sdk.config.settings import Settings
from sdk.utils.logger import DEFAULT_LOGGING_DICT, init_logging


def test_init_logging_sets_level():
    init_logging("DEBUG")
    log = logging.getLogger("ddcro")
    assert log.level == logging.DEBUG
    assert any(isinstance(h, RichHandler) for h in log.handlers)
    assert not log.propagate
    init_logging("INFO")


def test_custom_config_merges_sections():
    """
    A custom section replaces the matching keys and leaves the defaults intact.
    """
    init_logging("INFO", {"loggers": {"ddcro.solver": {"level": "ERROR"}}})
    assert logging.getLogger("ddcro.solver").level == logging.ERROR
    assert "ddcro" in DEFAULT_LOGGING_DICT["loggers"]
    assert "ddcro.solver" not in DEFAULT_LOGGING_DICT["loggers"], "Defaults are copied, not mutated"
    init_logging("INFO")


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("DDCRO_GAP_TOL", "1e-4")
    monkeypatch.setenv("DDCRO_LOG_LEVEL", "debug")
    s = Settings()
    assert s.GAP_TOL == 1e-4
    assert s.LOG_LEVEL == "DEBUG"
