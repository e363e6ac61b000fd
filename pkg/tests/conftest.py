"""
Pytest configuration and shared fixtures for morse-witten-lab tests.

This module provides:
- Shared test fixtures
- Test configuration
- Small reference complexes and landscapes
- Result store setup
"""

import math
from pathlib import Path

import numpy as np
import pytest

from morsewitten.config import Settings
from morsewitten.models.landscape import Domain
from morsewitten.services.filtration import build_cubical
from morsewitten.services.functions import builtin
from morsewitten.services.landscape import MorseFunction
from morsewitten.services.storage import ResultStore

REPO_ROOT = Path(__file__).resolve().parent.parent
EXPERIMENTS_DIR = REPO_ROOT / "experiments"


# Test configuration
@pytest.fixture
def test_settings():
    """Provide settings built from defaults, independent of the cached instance"""
    return Settings()


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(20240611)


@pytest.fixture
def store(tmp_path, test_settings):
    """Result store in a temporary directory"""
    return ResultStore(tmp_path / "run", test_settings.harness)


# Complexes
@pytest.fixture
def square_circle():
    """
    Four-vertex circle with vertex values 0, 2, 1, 3.

    Minima at vertices 0 and 2, maxima at 1 and 3; the minimum at value 1
    dies at the maximum at value 2.
    """
    return build_cubical(4, 1, (True, False), [0.0, 2.0, 1.0, 3.0])


@pytest.fixture
def torus_grid(rng):
    """6 x 6 periodic grid with random vertex values"""
    return build_cubical(6, 6, (True, True), rng.random(36))


@pytest.fixture
def disk_grid(rng):
    """4 x 4 bounded grid with random vertex values"""
    return build_cubical(4, 4, (False, False), rng.random(16))


# Landscapes
@pytest.fixture
def cosine():
    """cos(x) on the circle of length 2 pi"""
    return MorseFunction(builtin("cosine", (2 * math.pi,)), Domain.circle(), name="cosine")


@pytest.fixture
def double_well():
    """Asymmetric double well on the circle"""
    return MorseFunction(builtin("double_well", (2 * math.pi,)), Domain.circle(), name="double_well")


@pytest.fixture
def flat_circle():
    """The zero function on the circle"""
    return MorseFunction(builtin("flat", (2 * math.pi,)), Domain.circle(), name="flat")


@pytest.fixture
def torus_perturbed():
    """cos x + cos y + 0.3 sin(x + 2y) on the flat torus"""
    return MorseFunction(
        builtin("torus_perturbed", (2 * math.pi, 2 * math.pi)), Domain.flat_torus(), name="torus_perturbed"
    )


@pytest.fixture
def experiment_file(tmp_path):
    """Write an experiment file and return its path"""

    def _write(name: str, **values) -> Path:
        path = tmp_path / f"{name}.env"
        lines = [f"{key.upper()}={value}" for key, value in values.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


# Test markers
def pytest_configure(config):
    """Configure pytest markers"""
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "performance: Performance tests")


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add markers"""
    for item in items:
        if "unit" in item.nodeid:
            item.add_marker(pytest.mark.unit)
        elif "integration" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        elif "performance" in item.nodeid:
            item.add_marker(pytest.mark.performance)
