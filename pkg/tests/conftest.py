from pathlib import Path

import pytest

from rasesim.catalog import default_catalog

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()
