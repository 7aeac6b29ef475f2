import os

import numpy as np
import pytest

os.environ.setdefault("NLGP_THREADS", "1")

from nlgp.grid import make_grid  # noqa: E402

SUPPORTED_GRIDS = [
    (1, [64], [2 * np.pi]),
    (1, [256], [40.0]),
    (2, [16, 32], [10.0, 20.0]),
    (3, [8, 16, 8], [6.0, 8.0, 5.0]),
]


@pytest.fixture(params=SUPPORTED_GRIDS, ids=lambda g: f"{g[0]}d-{'x'.join(map(str, g[1]))}")
def any_grid(request):
    return make_grid(*request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(grid, rng):
    return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(criterion, ok, detail, elapsed):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail} ({elapsed:.2f} s)"
        ACCEPTANCE_LINES.append(line)
        reporter = request.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
