"""
Registry of the Monte Carlo scenarios with their published accuracies,
plus the synthetic stand-in for the cell-calcium curves.

For OU pairs sigma1 is not given; it follows from beta0 sigma0^2 = beta1 sigma1^2.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import ConfigError
from core.grid import Grid, LabeledSample
from core.simulate import BrownianModel, ClassModel, OUModel, SeedLike, StartKind, sample_labeled


ROSTER = ('bayes', 'param-plugin', 'nonparam-plugin', 'knn-sup', 'knn-pls')
REAL_DATA_ROSTER = ('knn-sup', 'knn-pls', 'nonparam-plugin')

# (mean, sd) per classifier, in the order knn-sup, knn-pls, nonparam, param, bayes
Published = Dict[str, Tuple[float, float]]


def _published(*pairs: Tuple[float, float]) -> Published:
    names = ('knn-sup', 'knn-pls', 'nonparam-plugin', 'param-plugin', 'bayes')
    return dict(zip(names, pairs))


def equivalent_ou_sigma(beta0: float, sigma0: float, beta1: float) -> float:
    """sigma1 with beta1 sigma1^2 = beta0 sigma0^2."""
    return float(np.sqrt(beta0 * sigma0 ** 2 / beta1))


def _ou_pair(beta0, eta0, sigma0, beta1, eta1, start: StartKind) -> Tuple[OUModel, OUModel]:
    sigma1 = equivalent_ou_sigma(beta0, sigma0, beta1)
    return (
        OUModel(beta0, eta0, sigma0, start),
        OUModel(beta1, eta1, sigma1, start),
    )


@dataclass(frozen=True)
class Scenario:
    id: str
    title: str
    model0: ClassModel
    model1: ClassModel
    published: Published = field(default_factory=dict)

    @property
    def family(self) -> str:
        return self.model0.family


def _brownian(id, title, c, sigma, theta, published) -> Scenario:
    return Scenario(
        id, title,
        BrownianModel(c, sigma, theta, with_drift=True),
        BrownianModel(c, sigma, theta, with_drift=False),
        published,
    )


def _ou(id, title, beta0, eta0, sigma0, beta1, eta1, start, published) -> Scenario:
    model0, model1 = _ou_pair(beta0, eta0, sigma0, beta1, eta1, start)
    return Scenario(id, title, model0, model1, published)


SCENARIOS: Dict[str, Scenario] = {s.id: s for s in [
    _brownian('brownian-det-1', 'Brownian, start 0, c=1.5, sigma=1', 1.5, 1.0, 0.0,
              _published((0.68, 0.07), (0.73, 0.07), (0.71, 0.16), (0.77, 0.06), (0.77, 0.06))),
    _brownian('brownian-det-2', 'Brownian, start 0, c=3, sigma=1', 3.0, 1.0, 0.0,
              _published((0.90, 0.05), (0.91, 0.05), (0.86, 0.16), (0.93, 0.04), (0.93, 0.03))),
    _brownian('brownian-det-3', 'Brownian, start 0, c=2, sigma=2', 2.0, 2.0, 0.0,
              _published((0.60, 0.08), (0.64, 0.08), (0.64, 0.16), (0.69, 0.07), (0.69, 0.06))),
    _brownian('brownian-rand-1', 'Brownian, random start theta=1, c=1.5, sigma=1', 1.5, 1.0, 1.0,
              _published((0.67, 0.07), (0.66, 0.08), (0.71, 0.08), (0.77, 0.07), (0.77, 0.06))),
    _brownian('brownian-rand-2', 'Brownian, random start theta=0.5, c=1.5, sigma=1', 1.5, 1.0, 0.5,
              _published((0.67, 0.07), (0.70, 0.08), (0.72, 0.08), (0.77, 0.06), (0.77, 0.06))),
    _ou('ou-det-1', 'OU, start 0, beta=(1,1), eta=(0,1), sigma0=1',
        1.0, 0.0, 1.0, 1.0, 1.0, StartKind.DETERMINISTIC,
        _published((0.54, 0.08), (0.58, 0.08), (0.60, 0.14), (0.63, 0.07), (0.62, 0.07))),
    _ou('ou-det-2', 'OU, start 0, beta=(0.4,1), eta=(0,1), sigma0=0.4',
        0.4, 0.0, 0.4, 1.0, 1.0, StartKind.DETERMINISTIC,
        _published((0.83, 0.09), (0.86, 0.06), (0.82, 0.16), (0.88, 0.05), (0.88, 0.05))),
    _ou('ou-rand-1', 'OU, stationary start, beta=(0.5,1), eta=(0,0.5), sigma0=1',
        0.5, 0.0, 1.0, 1.0, 0.5, StartKind.RANDOM,
        _published((0.59, 0.13), (0.60, 0.11), (0.63, 0.14), (0.63, 0.07), (0.64, 0.14))),
    _ou('ou-rand-2', 'OU, stationary start, beta=(0.5,1), eta=(0,2), sigma0=2',
        0.5, 0.0, 2.0, 1.0, 2.0, StartKind.RANDOM,
        _published((0.69, 0.11), (0.72, 0.10), (0.74, 0.11), (0.74, 0.07), (0.74, 0.09))),
]}


def get_scenario(scenario_id: str) -> Scenario:
    """
    Raises:
        ConfigError: If the id is not registered
    """
    try:
        return SCENARIOS[scenario_id]
    except KeyError:
        known = ', '.join(SCENARIOS)
        raise ConfigError(f"Unknown scenario '{scenario_id}' (known: {known})") from None


def list_scenarios() -> List[str]:
    return list(SCENARIOS)


# Stand-in for the cell-calcium data: two stationary OU classes on the
# log scale, n0 = 45 controls and n1 = 44 treated curves.
CELL_STAND_IN = (
    OUModel(beta=0.5, eta=0.0, sigma=1.0, start=StartKind.RANDOM),
    OUModel(beta=2.0, eta=0.0, sigma=0.5, start=StartKind.RANDOM),
)
CELL_COUNTS = (45, 44)


def synthetic_cell_sample(
    seed: SeedLike,
    n_intervals: int = 50,
    counts: Optional[Tuple[int, int]] = None
) -> LabeledSample:
    """Labeled sample mimicking the shape of the cell-calcium study."""
    n0, n1 = counts or CELL_COUNTS
    return sample_labeled(
        CELL_STAND_IN[0], CELL_STAND_IN[1], n0, n1,
        None, Grid.uniform(n_intervals), seed
    )
