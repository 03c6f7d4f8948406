import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lengthlab.lab.corpus import gen_cycle, gen_hawaiian, gen_torus, gen_tree  # noqa: E402


@pytest.fixture(scope="session")
def cycle6():
    """Circumference-6 cycle, mesh 1/2."""
    return gen_cycle(6, 12).graph


@pytest.fixture(scope="session")
def cycle24():
    return gen_cycle(6, 24).graph


@pytest.fixture(scope="session")
def torus():
    return gen_torus(6, 2, "1/4").graph


@pytest.fixture(scope="session")
def hawaiian():
    return gen_hawaiian([6, 3, 2], 12).graph


@pytest.fixture(scope="session")
def tree():
    return gen_tree(12, seed=3).graph


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
