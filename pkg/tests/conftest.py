import numpy as np
import pytest

from admmto.fem import FemContext, SimpParams
from admmto.mesh import build_adjacency, build_unit_square_mesh

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mesh2():
    return build_unit_square_mesh(2)


@pytest.fixture(scope="session")
def graph2(mesh2):
    return build_adjacency(mesh2)


@pytest.fixture(scope="session")
def mesh4():
    return build_unit_square_mesh(4)


@pytest.fixture(scope="session")
def fem4(mesh4):
    return FemContext(mesh4, SimpParams(1e-3, 3.0), source=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)


def read_rows(path) -> list[dict]:
    import csv

    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
