import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from granex.ocel import parse_log
from granex.session import initialize

FIXTURE_BYTES = resources.files("granex.data").joinpath("account_opening.json").read_bytes()


@pytest.fixture
def fixture_log():
    return parse_log(FIXTURE_BYTES)


@pytest.fixture
def fixture_session(fixture_log):
    return initialize(fixture_log, threshold=37, seed=0)


def golden_path(name: str) -> Path:
    return Path(__file__).parent / "goldens" / name
