from pathlib import Path

import pytest

from mwlab.fixtures import load_module

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def rank3_module():
    return load_module(FIXTURES / "rank3_module.json")


@pytest.fixture(scope="session")
def tors6_module():
    return load_module(FIXTURES / "tors6_module.json")


@pytest.fixture(scope="session")
def bad_torsion_module():
    return load_module(FIXTURES / "synthetic_bad_torsion.json")
