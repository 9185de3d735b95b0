import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from basketio.bench.datasets import generate_dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def nano_small():
    return list(generate_dataset("nanoaod", 2500, 7, batch_size=700))


@pytest.fixture(scope="session")
def carray_small():
    return list(generate_dataset("carray", 2500, 7, batch_size=700))


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
