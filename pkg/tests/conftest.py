import cmath
import math

import numpy as np
import pytest

from noded_schottky import _kernels
from noded_schottky.moebius import MoebiusMap

W0 = cmath.exp(1j * math.pi / 3)

BACKENDS = ["numpy"] + (["numba"] if _kernels.JIT_AVAILABLE else [])


@pytest.fixture(params=BACKENDS)
def kernel_backend(request):
    with _kernels.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_map(rng, scale=1.0) -> MoebiusMap:
    while True:
        a, b, c, d = scale * (rng.normal(size=4) + 1j * rng.normal(size=4))
        if abs(a * d - b * c) > 1e-2:
            return MoebiusMap(a, b, c, d)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
