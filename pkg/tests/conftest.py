import pytest

from cellsim.engine import Engine
from cellsim.parameters import PRESETS, RATINGS, load_preset


@pytest.fixture(scope="session")
def presets():
    return {name: load_preset(name) for name in PRESETS}


@pytest.fixture(scope="session")
def engines(presets):
    return {name: Engine(presets[name], RATINGS[name]) for name in PRESETS}
