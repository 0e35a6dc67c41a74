"""
Pytest configuration for pirogov tests.

This file contains pytest fixtures and configuration shared across test modules.
"""

import pytest

from pirogov.core.config import clear_settings_cache
from pirogov.models.lattice import Region


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests (acceptance criteria against the oracles)")
    config.addinivalue_line("markers", "slow: Slow running tests (> 1 second)")


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Run every test with default settings, one worker thread and no oracle disk cache."""
    for name in (
        "PIROGOV_CACHE_DIR",
        "PIROGOV_LOG_LEVEL",
        "PIROGOV_LOG_ENGINE",
        "PIROGOV_CLUSTER_METHOD",
        "PIROGOV_CONTOUR_ENUMERATION",
        "PIROGOV_ORACLE_STATE_CAP",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("PIROGOV_THREADS", "1")
    monkeypatch.setenv("PIROGOV_ENVIRONMENT", "testing")
    monkeypatch.chdir(tmp_path)
    clear_settings_cache()
    yield
    clear_settings_cache()


@pytest.fixture
def box5():
    """5x5 free box, the smallest square with an interior point at clearance 2."""
    return Region.box((5, 5))


@pytest.fixture
def box6():
    return Region.box((6, 6))


@pytest.fixture
def torus4():
    return Region.full_torus(4, 2)
