import numpy as np
import pytest

from apps.datasets.generation import generate
from apps.datasets.models import Dataset
from apps.fb.models import FBModel, ModelConfig
from apps.maze.models import MazeSpec
from apps.maze.policies import RandomPolicy
from project.configuration import build_config
from tests.factories import TINY_MODEL, tiny_config_data


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run long training tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def spec():
    return MazeSpec(horizon=20)


@pytest.fixture
def tiny_config():
    return build_config(tiny_config_data())


@pytest.fixture
def model_config():
    return ModelConfig(**TINY_MODEL)


@pytest.fixture
def fb_model(model_config):
    return FBModel(model_config, 4, 2, np.random.default_rng(1))


@pytest.fixture
def maze_dataset(spec):
    rng = np.random.default_rng(2)
    return generate(spec, RandomPolicy(rng), 4, rng, seed=2)


@pytest.fixture
def chain_dataset():
    """Deterministic chain 0 -> 1 -> 2 -> 2 over one-hot states with a single action."""
    eye = np.eye(3)
    states = eye[[0, 1, 2]]
    next_states = eye[[1, 2, 2]]
    return Dataset(states=states, actions=np.zeros((3, 1)), next_states=next_states,
                   rewards=np.zeros(3), terminals=np.zeros(3, dtype=bool))
