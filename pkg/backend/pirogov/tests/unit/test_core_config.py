"""
Unit tests for the core layer: settings, exceptions, logging, random
streams and the ordered parallel map.
"""

import json
import logging
import threading

import numpy as np
import pytest

from pirogov.core.config import Settings, clear_settings_cache, get_settings
from pirogov.core.exceptions import (
    BackendMismatchError,
    BoundaryConditionError,
    CapExceededError,
    ConfigurationError,
    GeometryError,
    PirogovError,
    RegimeError,
)
from pirogov.core.logging_config import PACKAGE_LOGGER, configure_logging
from pirogov.core.parallel import ordered_map
from pirogov.core.rng import RandomStream


class TestCoreConfigModule:
    """Test suite for the settings module."""

    def test_settings_defaults(self):
        """Test that documented defaults are in place."""
        settings = Settings()

        assert settings.potts_contour_delta == 0.05
        assert settings.hardcore_contour_delta == 0.02
        assert settings.torus_floor_constant == 0.1
        assert settings.oracle_state_cap == 2 ** 24
        assert settings.cluster_method == "growth"
        assert settings.log_engine == "auto"

    def test_environment_override(self, monkeypatch):
        """Test that PIROGOV_* variables override fields."""
        # Arrange
        monkeypatch.setenv("PIROGOV_ORACLE_STATE_CAP", "1024")
        monkeypatch.setenv("PIROGOV_CLUSTER_METHOD", "trees")
        clear_settings_cache()

        # Act
        settings = get_settings()

        # Assert
        assert settings.oracle_state_cap == 1024
        assert settings.cluster_method == "trees"

    def test_get_settings_is_cached(self):
        """Test that get_settings returns the same instance until the cache is cleared."""
        first = get_settings()
        assert get_settings() is first

        clear_settings_cache()
        assert get_settings() is not first

    @pytest.mark.parametrize(
        "name,value",
        [
            ("PIROGOV_LOG_ENGINE", "magic"),
            ("PIROGOV_CLUSTER_METHOD", "guess"),
            ("PIROGOV_LOG_FORMAT", "xml"),
            ("PIROGOV_ENVIRONMENT", "staging"),
            ("PIROGOV_THREADS", "-1"),
        ],
    )
    def test_invalid_environment_value_raises_configuration_error(self, monkeypatch, name, value):
        """Test that validation failures surface as ConfigurationError."""
        monkeypatch.setenv(name, value)
        clear_settings_cache()

        with pytest.raises(ConfigurationError):
            get_settings()

    def test_log_level_is_normalised(self, monkeypatch):
        """Test that the log level is upper-cased."""
        monkeypatch.setenv("PIROGOV_LOG_LEVEL", "debug")
        clear_settings_cache()

        assert get_settings().log_level == "DEBUG"

    def test_worker_threads_zero_means_all_cores(self, mocker):
        """Test that threads=0 resolves to the CPU count."""
        mocker.patch("pirogov.core.config.os.cpu_count", return_value=6)

        assert Settings(threads=0).worker_threads == 6
        assert Settings(threads=3).worker_threads == 3


class TestExceptionHierarchy:
    """Test suite for exit codes and error codes."""

    def test_exit_codes(self):
        """Test that each error family maps to its CLI exit code."""
        assert PirogovError.exit_code == 1
        assert ConfigurationError.exit_code == 2
        assert GeometryError.exit_code == 2
        assert BoundaryConditionError.exit_code == 2
        assert RegimeError.exit_code == 3
        assert CapExceededError.exit_code == 4

    def test_series_errors_are_validation_errors(self):
        """Test that series precondition errors are configuration errors."""
        error = BackendMismatchError("mixed")

        assert isinstance(error, ConfigurationError)
        assert error.code == "backend_mismatch"


class TestLoggingConfig:
    """Test suite for configure_logging."""

    def test_text_handler_installed_once(self):
        """Test that repeated configuration replaces the package handler."""
        configure_logging(Settings(log_level="WARNING"))
        logger = configure_logging(Settings(log_level="DEBUG"))

        handlers = [h for h in logger.handlers if getattr(h, "_pirogov_handler", False)]
        assert len(handlers) == 1
        assert logger.name == PACKAGE_LOGGER
        assert logger.level == logging.DEBUG
        assert logger.propagate is False

    def test_json_format_emits_json(self, capsys):
        """Test that log_format=json produces one JSON object per record."""
        logger = configure_logging(Settings(log_format="json", log_level="INFO"))

        logging.getLogger("pirogov.tests").info("hello %s", "world")

        line = capsys.readouterr().err.strip().splitlines()[-1]
        record = json.loads(line)
        assert record["message"] == "hello world"
        assert record["name"] == "pirogov.tests"
        logger.handlers.clear()


class TestRandomStream:
    """Test suite for seeded, splittable streams."""

    def test_same_seed_and_path_reproduce(self):
        """Test that a (seed, path) pair always yields the same uniforms."""
        a = RandomStream(7).child(3, 1).uniforms(5)
        b = RandomStream(7).child(3).child(1).uniforms(5)

        np.testing.assert_array_equal(a, b)

    def test_children_are_distinct(self):
        """Test that sibling streams differ."""
        root = RandomStream(0)

        assert root.child(0).uniform(0) != root.child(1).uniform(0)

    def test_step_value_does_not_depend_on_count(self):
        """Test that step t reads the same value however many steps are generated."""
        stream = RandomStream(11)

        assert stream.uniform(3) == stream.uniforms(10)[3]

    def test_negative_seed_rejected(self):
        """Test that seeds must be non-negative."""
        with pytest.raises(ValueError):
            RandomStream(-1)


class TestOrderedMap:
    """Test suite for the ordered parallel map."""

    def test_results_keep_input_order(self):
        """Test that results come back in input order on a pool."""
        assert ordered_map(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]

    def test_single_thread_runs_inline(self):
        """Test that threads=1 never leaves the calling thread."""
        caller = threading.get_ident()

        seen = ordered_map(lambda _x: threading.get_ident(), range(5), threads=1)

        assert set(seen) == {caller}

    def test_thread_count_does_not_change_output(self):
        """Test that the reduction is identical for 1 and 8 threads."""
        func = lambda x: (x, x % 3)  # noqa: E731

        assert ordered_map(func, range(50), threads=1) == ordered_map(func, range(50), threads=8)
