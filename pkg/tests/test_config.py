"""Tests for the configuration and logger modules of the qlangevin package."""

import logging
from unittest import mock

import pytest

from qlangevin.config import Settings, get_settings
from qlangevin.errors import ValidationError
from qlangevin.logs import ROOT_LOGGER_NAME, get_logger, set_level


@pytest.mark.unit
def test_get_settings_from_env(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_LOG_LEVEL", "debug")
    monkeypatch.setenv("QLANGEVIN_SEED", "17")
    monkeypatch.setenv("QLANGEVIN_MAX_CHAIN_DIM", "4096")
    settings = get_settings()
    assert settings == Settings(log_level="DEBUG", seed=17, max_chain_dim=4096)


@pytest.mark.unit
def test_get_settings_defaults(monkeypatch):
    monkeypatch.delenv("QLANGEVIN_LOG_LEVEL", raising=False)
    monkeypatch.delenv("QLANGEVIN_SEED", raising=False)
    monkeypatch.delenv("QLANGEVIN_MAX_CHAIN_DIM", raising=False)

    with mock.patch("qlangevin.config.load_dotenv") as mock_load_dotenv:
        settings = get_settings()
        mock_load_dotenv.assert_called_once()
    assert settings == Settings()
    assert settings.max_chain_dim == 2**16


@pytest.mark.unit
def test_get_settings_skips_dotenv_when_env_complete():
    with mock.patch("qlangevin.config.load_dotenv") as mock_load_dotenv:
        get_settings()
        mock_load_dotenv.assert_not_called()


@pytest.mark.unit
def test_get_settings_invalid_log_level(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_LOG_LEVEL", "LOUD")
    with pytest.raises(ValidationError, match="QLANGEVIN_LOG_LEVEL"):
        get_settings()


@pytest.mark.unit
def test_get_settings_invalid_integer(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_SEED", "seven")
    with pytest.raises(ValidationError, match="Invalid integer setting"):
        get_settings()


@pytest.mark.unit
def test_get_settings_negative_seed(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_SEED", "-1")
    with pytest.raises(ValidationError, match="non-negative"):
        get_settings()


@pytest.mark.unit
def test_get_settings_zero_chain_dim(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_MAX_CHAIN_DIM", "0")
    with pytest.raises(ValidationError, match="positive"):
        get_settings()


@pytest.mark.unit
def test_get_logger_prefixes_package_name():
    assert get_logger("qlangevin.model").name == "qlangevin.model"
    assert get_logger("experiments").name == "qlangevin.experiments"
    assert get_logger().name == ROOT_LOGGER_NAME


@pytest.mark.unit
def test_get_logger_attaches_single_handler():
    get_logger("first")
    get_logger("second")
    assert len(logging.getLogger(ROOT_LOGGER_NAME).handlers) == 1


@pytest.mark.unit
def test_set_level_overrides_root_level():
    root = logging.getLogger(ROOT_LOGGER_NAME)
    previous = root.level
    try:
        set_level("debug")
        assert root.level == logging.DEBUG
    finally:
        root.setLevel(previous)
