from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lulu.connectivity import Connectivity, GridImage
from lulu.io import read_pgm

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
C4 = Connectivity.four()
C8 = Connectivity.eight()


def grids(max_side=6, max_value=9, min_value=0):
    shapes = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shapes.flatmap(
        lambda s: hnp.arrays(np.int64, s, elements=st.integers(min_value, max_value))
    ).map(GridImage)


def random_suite(count=100, max_side=8, max_value=9, seed=0):
    """Seeded (image, n, connectivity) triples for exhaustive-style sweeps."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        h, w = (int(v) for v in rng.integers(1, max_side + 1, 2))
        f = GridImage(rng.integers(0, max_value + 1, (h, w)))
        n = int(rng.integers(1, 5))
        out.append((f, n, C4 if i % 2 == 0 else C8))
    return out


def fixture_images():
    return {p.stem: read_pgm(p) for p in sorted(FIXTURES.glob("*.pgm"))}


@pytest.fixture(scope="session")
def fixtures():
    return fixture_images()


def spike(value=5, size=3):
    v = np.zeros((size, size), dtype=np.int64)
    v[size // 2, size // 2] = value
    return GridImage(v)


def two_pulse():
    v = np.zeros((4, 4), dtype=np.int64)
    v[1, 1], v[1, 2] = 8, 3
    return GridImage(v)


def plateau():
    v = np.zeros((4, 4), dtype=np.int64)
    v[1, 1] = v[1, 2] = 3
    return GridImage(v)


_acceptance: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{status}  {name}")
