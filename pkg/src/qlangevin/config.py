"""Configuration Module for qlangevin"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from qlangevin.errors import ValidationError

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
ENV_KEYS = ("QLANGEVIN_LOG_LEVEL", "QLANGEVIN_SEED", "QLANGEVIN_MAX_CHAIN_DIM")


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    seed: int = 0
    max_chain_dim: int = 2**16


def get_settings() -> Settings:
    """
    Retrieves run settings from the environment.

    Variables missing from the process environment are looked up in a .env
    file before falling back to the defaults of Settings.

    :return: A Settings instance.
    :raises ValidationError: If a variable holds an unusable value.
    """
    if not all(os.getenv(key) for key in ENV_KEYS):
        load_dotenv()

    log_level = os.getenv("QLANGEVIN_LOG_LEVEL", Settings.log_level).upper()
    if log_level not in LOG_LEVELS:
        raise ValidationError(f"QLANGEVIN_LOG_LEVEL must be one of {LOG_LEVELS}, got {log_level!r}")

    try:
        seed = int(os.getenv("QLANGEVIN_SEED", Settings.seed))
        max_chain_dim = int(os.getenv("QLANGEVIN_MAX_CHAIN_DIM", Settings.max_chain_dim))
    except ValueError as e:
        raise ValidationError(f"Invalid integer setting: {e}") from e

    if seed < 0:
        raise ValidationError("QLANGEVIN_SEED must be non-negative")
    if max_chain_dim < 1:
        raise ValidationError("QLANGEVIN_MAX_CHAIN_DIM must be positive")

    return Settings(log_level=log_level, seed=seed, max_chain_dim=max_chain_dim)
