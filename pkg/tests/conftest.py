import json

import pytest

from config.settings import SCHEDULES_DIR
from core.basis import BasisExpander
from core.operator import OperatorColumns
from core.schedule import Schedule
from core.witness import WitnessBuilder


@pytest.fixture(scope="session")
def fixture_schedule():
    return Schedule.from_file(SCHEDULES_DIR / "fixture.json")


@pytest.fixture(scope="session")
def naive_schedule():
    return Schedule.from_file(SCHEDULES_DIR / "naive.json")


@pytest.fixture(scope="session")
def expander(fixture_schedule):
    return BasisExpander(fixture_schedule)


@pytest.fixture(scope="session")
def columns(fixture_schedule, expander):
    return OperatorColumns(fixture_schedule, expander)


@pytest.fixture(scope="session")
def builder(fixture_schedule, expander):
    return WitnessBuilder(fixture_schedule, expander)


@pytest.fixture
def write_schedule(tmp_path):
    """Writes a descriptor into tmp_path and returns its path."""
    def _write(name="custom", head=(), tail=None, square_flag=True):
        body = {"name": name, "head": [list(p) for p in head], "square_flag": square_flag}
        if tail is not None:
            body["tail"] = tail
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(body))
        return path
    return _write
