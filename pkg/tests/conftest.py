import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from giph.dataset import GenSpec1D, generate_1d  # noqa: E402
from giph.pl_core import PLFunction  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def pl_functions(draw, max_points=6, lo=0.0, hi=1.0):
    """Random PL functions on [lo, hi] with zero end values."""
    k = draw(st.integers(1, max_points))
    xs = draw(st.lists(st.floats(lo + 1e-3, hi - 1e-3), min_size=k, max_size=k, unique=True))
    ys = draw(st.lists(st.floats(-1, 1), min_size=k, max_size=k))
    xs = np.sort(xs)
    if np.any(np.diff(xs) < 1e-6):
        xs = np.linspace(lo, hi, k + 2)[1:-1]
    return PLFunction(np.r_[lo, xs, hi], np.r_[0.0, ys, 0.0])


@pytest.fixture(scope="session")
def functions():
    return generate_1d(GenSpec1D(60, seed=11))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = sorted(getattr(module, "REPORT", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
