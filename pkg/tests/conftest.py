import pytest

from lhsl import HybridLineSpec, paper_right_handed, paper_superlattice
from lhsl.modes import find_all_modes

ACCEPTANCE_LINES = []


def paper_line(eps=2.0, n_cells=200):
    return HybridLineSpec(paper_superlattice(eps=eps, n_cells=n_cells), paper_right_handed())


@pytest.fixture(scope="session")
def line():
    return paper_line()


@pytest.fixture(scope="session")
def modes(line):
    return find_all_modes(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in ACCEPTANCE_LINES:
            terminalreporter.write_line(text)
