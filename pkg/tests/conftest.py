from pathlib import Path

import pytest

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def rat_scenario_text() -> str:
    return (SCENARIO_DIR / "reference_rat.scn").read_text()


@pytest.fixture(scope="session")
def pat_scenario_text() -> str:
    return (SCENARIO_DIR / "reference_pat.scn").read_text()
