from pathlib import Path

import numpy as np
import pytest

from priceinquiry.kernel import build_kernel, law_for
from priceinquiry.lmp_curve import LmpTable, build_curve, load_curves

ROOT = Path(__file__).resolve().parents[1]
PJM = ROOT / "data" / "pjm5.csv"
BUSES = ("A", "B", "C", "D", "E")

_KERNELS = {}


def kernel_for(curve, theta, horizon=10):
    key = (curve.bus_id, theta, horizon)
    if key not in _KERNELS:
        _KERNELS[key] = build_kernel(curve, law_for(curve, theta), horizon)
    return _KERNELS[key]


@pytest.fixture(scope="session")
def pjm_curves():
    return {c.bus_id: c for c in load_curves(PJM)}


@pytest.fixture(scope="session")
def toy_curve():
    # two levels: price 10 on [0, 500), price 20 on [500, 1000]
    return build_curve(LmpTable("toy", (0.0, 500.0, 1000.0), (10.0, 20.0, 20.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion lines printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
