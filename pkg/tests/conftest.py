from pathlib import Path

import pytest

from khconc import catalog
from khconc.diagram import BraidWord, PlanarDiagram, braid_closure

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def t45():
    return catalog.lookup("T(4,5)")


@pytest.fixture
def unknot():
    return PlanarDiagram.unknot()


@pytest.fixture
def trefoil():
    return braid_closure(BraidWord(2, (1, 1, 1)))


@pytest.fixture
def fig8():
    return braid_closure(BraidWord(3, (1, -2, 1, -2)))


@pytest.fixture
def fixtures_dir():
    return FIXTURES
