"""
Shared pytest configuration for qglnn
"""
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from core.coeffs import K, u, qscalar  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exact suites that take minutes")


@st.composite
def laurent_polys(draw, max_terms=4, max_exp=3):
    """Random Laurent polynomial in u with small integer coefficients"""
    coeffs = draw(st.lists(st.integers(-4, 4), min_size=1, max_size=max_terms))
    low = draw(st.integers(-max_exp, max_exp))
    return sum((qscalar(c) * u ** (low + i) for i, c in enumerate(coeffs)), K.zero)


@st.composite
def qscalars(draw):
    """Random element of QQ(u) with nonzero denominator"""
    top = draw(laurent_polys())
    bottom = draw(laurent_polys().filter(lambda p: bool(p)))
    return top / bottom


@pytest.fixture
def field_gen():
    return u
