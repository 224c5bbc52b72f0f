"""Shared pytest configuration: puts src/ on the import path."""

import sys
from pathlib import Path

import pytest

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import graph_core  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale ensembles (deselect with -m 'not slow')")


@pytest.fixture
def debug_checks(monkeypatch):
    """Recount the graph after every mutation."""
    monkeypatch.setattr(graph_core, "DEBUG_CHECKS", True)
    yield


@pytest.fixture
def data_dir() -> Path:
    return Path(__file__).parent.parent / "data"
