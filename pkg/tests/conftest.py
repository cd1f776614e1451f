import numpy as np
import pytest

from kslab.kscons import make_family
from kslab.states import STANDARD_FAMILY, build_states


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def family_1024():
    return {n: make_family(1024, n) for n in (1, 2, 4, 8)}


@pytest.fixture(scope="session")
def states_1024(family_1024):
    return {n: build_states(f.cfg, STANDARD_FAMILY) for n, f in family_1024.items()}


def random_vectors(rng, N, m=3):
    v = rng.normal(size=(N, m)) + 1j * rng.normal(size=(N, m))
    return v / np.linalg.norm(v, axis=0)
