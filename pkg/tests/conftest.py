import numpy as np
import pytest

from s3comp.dataset import normalize_columns


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, D, N):
    return normalize_columns(rng.standard_normal((D, N)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
