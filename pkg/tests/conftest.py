"""Test configuration — ensure src modules are importable, plus shared fixtures."""
import sys
from pathlib import Path

import pytest

# Add project root to path so `from src.xxx import` works
sys.path.insert(0, str(Path(__file__).parent.parent))


@pytest.fixture(scope="session")
def delta_1000():
    """Ramanujan's Delta to q^1000, built once per session."""
    from src.elliptic import delta
    return delta(1000)


@pytest.fixture
def gaussian_index3_system():
    """Seeded random admissible system over Q(i), weight 10, index 3."""
    from src.jacobi_coeffs import random_admissible
    return random_admissible(-4, 10, 3, 120, seed=7)
