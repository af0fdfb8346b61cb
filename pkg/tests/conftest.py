"""
Shared fixtures for the Magnus Walks test suite
"""

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.groups import make_abelian_group, make_free_solvable  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: larger Monte Carlo or convolution runs")


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def z2():
    return make_abelian_group(2)


@pytest.fixture
def s22():
    return make_free_solvable(2, 2)
