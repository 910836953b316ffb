import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def random_hermitian(rng, w):
    G = rng.standard_normal((w, w)) + 1j * rng.standard_normal((w, w))
    return 0.5 * (G + G.conj().T)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
