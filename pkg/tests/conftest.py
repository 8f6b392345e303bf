import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.grid import Grid, LabeledSample  # noqa: E402
from core.scenarios import get_scenario  # noqa: E402
from core.simulate import sample_labeled  # noqa: E402


@pytest.fixture
def grid50():
    return Grid.uniform(50)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def brownian_sample(grid50):
    """40 curves per class from the c=1.5 deterministic-start Brownian pair."""
    scenario = get_scenario('brownian-det-1')
    return sample_labeled(scenario.model0, scenario.model1, 40, 40, 0.5, grid50, 7)


@pytest.fixture
def small_sample():
    """12 curves on a coarse grid, two well separated classes."""
    grid = Grid.uniform(10)
    generator = np.random.default_rng(3)
    values = generator.standard_normal((12, 11)) * 0.3
    values[:6] += 2.0
    labels = np.array([0] * 6 + [1] * 6)
    return LabeledSample(grid, values, labels, 0.5)
