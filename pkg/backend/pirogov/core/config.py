"""
Configuration management for pirogov.

This module provides centralized configuration with environment variable
support (prefix ``PIROGOV_``, optional ``.env`` file) and validation.
"""

from functools import lru_cache
from pathlib import Path
from typing import Optional
import os

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from pirogov.core.exceptions import ConfigurationError


class Settings(BaseSettings):
    """
    Application settings with environment variable support.

    Groups the enumeration caps, engine selection and the documented
    default zero-free radii used by the contour instances. Every field can
    be overridden with ``PIROGOV_<FIELD_NAME>``.
    """

    model_config = SettingsConfigDict(
        env_prefix="PIROGOV_",
        env_file=".env",
        extra="ignore",
    )

    # Environment Detection
    environment: str = Field("development", description="development, production or testing")

    # Logging Configuration
    log_level: str = Field("INFO", description="Root log level")
    log_format: str = Field("text", description="text or json")

    # Caching and parallelism
    cache_dir: Optional[Path] = Field(None, description="Oracle disk cache directory")
    threads: int = Field(0, ge=0, description="Worker threads, 0 means all cores")

    # Enumeration caps
    oracle_state_cap: int = Field(2 ** 24, gt=0)
    ursell_vertex_cap: int = Field(24, gt=0)
    ursell_direct_edge_cap: int = Field(18, ge=0)
    configuration_cap: int = Field(2 ** 20, gt=0)
    cluster_work_limit: int = Field(200_000, gt=0)

    # Engine selection
    log_engine: str = Field("auto", description="auto, cluster or newton")
    cluster_method: str = Field("growth", description="growth or trees")
    contour_enumeration: str = Field("auto", description="auto, configurations or supports")

    # Model constants
    potts_contour_delta: float = Field(0.05, gt=0)
    hardcore_contour_delta: float = Field(0.02, gt=0)
    torus_floor_constant: float = Field(0.1, gt=0)
    float_tolerance: float = Field(1e-12, gt=0)

    @field_validator("environment")
    @classmethod
    def _check_environment(cls, value: str) -> str:
        if value not in ("development", "production", "testing"):
            raise ValueError(f"unknown environment {value!r}")
        return value

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ValueError(f"unknown log level {value!r}")
        return value

    @field_validator("log_format")
    @classmethod
    def _check_log_format(cls, value: str) -> str:
        if value not in ("text", "json"):
            raise ValueError(f"unknown log format {value!r}")
        return value

    @field_validator("log_engine")
    @classmethod
    def _check_log_engine(cls, value: str) -> str:
        if value not in ("auto", "cluster", "newton"):
            raise ValueError(f"unknown log engine {value!r}")
        return value

    @field_validator("cluster_method")
    @classmethod
    def _check_cluster_method(cls, value: str) -> str:
        if value not in ("growth", "trees"):
            raise ValueError(f"unknown cluster method {value!r}")
        return value

    @field_validator("contour_enumeration")
    @classmethod
    def _check_contour_enumeration(cls, value: str) -> str:
        if value not in ("auto", "configurations", "supports"):
            raise ValueError(f"unknown contour enumeration strategy {value!r}")
        return value

    @property
    def worker_threads(self) -> int:
        """Resolved thread count (``threads=0`` means every core)."""
        return self.threads or (os.cpu_count() or 1)


@lru_cache()
def get_settings() -> Settings:
    """
    Get application settings (singleton pattern).

    Returns the same Settings instance on subsequent calls. Uses lru_cache
    to ensure singleton behavior.

    Returns:
        Settings: The application settings object

    Raises:
        ConfigurationError: If an environment value fails validation
    """
    try:
        return Settings()
    except ValidationError as exc:
        raise ConfigurationError(f"invalid PIROGOV_* configuration: {exc}") from exc


def clear_settings_cache() -> None:
    """
    Clear the settings cache.

    Used by tests and the CLI so that environment variable changes are
    picked up by new settings instances.
    """
    get_settings.cache_clear()
