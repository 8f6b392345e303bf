"""
Exact-in-distribution simulation of the Brownian and Ornstein-Uhlenbeck
class models on a grid.

Each model also exposes its exact triangular covariance factors so the
Bayes classifier can run the general log-RN pipeline on them.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from core.errors import ConfigError, StructuralError
from core.grid import Curve, Grid, LabeledSample
from core.rn_derivative import TriangularSpec


logger = logging.getLogger(__name__)

SeedLike = Union[int, Sequence[int], np.random.Generator, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator for an integer seed, a seed sequence or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class StartKind(str, Enum):
    DETERMINISTIC = 'deterministic'
    RANDOM = 'random'


@dataclass(frozen=True)
class BrownianModel:
    """
    Brownian motion with drift: X(t) = X(0) + c t [drift] + sigma W(t).

    X(0) ~ N(0, theta^2); theta = 0 gives a deterministic start at 0.
    Class 0 carries the drift, class 1 is the same model with with_drift=False.
    """

    c: float
    sigma: float
    theta: float = 0.0
    with_drift: bool = True

    family = 'brownian'

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise ConfigError(f"Brownian drift c must be finite, got {self.c}")
        if not self.sigma > 0:
            raise ConfigError(f"Brownian sigma must be > 0, got {self.sigma}")
        if not self.theta >= 0:
            raise ConfigError(f"Brownian theta must be >= 0, got {self.theta}")

    @property
    def drift(self) -> float:
        return float(self.c) if self.with_drift else 0.0

    @property
    def start_kind(self) -> StartKind:
        return StartKind.RANDOM if self.theta > 0 else StartKind.DETERMINISTIC

    def mean(self, grid: Grid) -> np.ndarray:
        return self.drift * grid.points

    def triangular_spec(self, grid: Grid) -> TriangularSpec:
        t = grid.points
        zeros = np.zeros_like(t)
        ones = np.ones_like(t)

        return TriangularSpec(
            times=t,
            m=self.drift * t, dm=self.drift * ones, d2m=zeros,
            u=self.theta ** 2 + self.sigma ** 2 * t, du=self.sigma ** 2 * ones, d2u=zeros,
            v=ones, dv=zeros, d2v=zeros,
        )

    def sample_paths(self, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
        delta = grid.delta
        start = self.theta * rng.standard_normal(n) if self.theta > 0 else np.zeros(n)
        increments = (
            self.drift * delta
            + self.sigma * np.sqrt(delta) * rng.standard_normal((n, grid.n_intervals))
        )

        paths = np.empty((n, len(grid)))
        paths[:, 0] = start
        paths[:, 1:] = start[:, None] + np.cumsum(increments, axis=1)

        return paths

    def describe(self) -> Dict[str, Any]:
        return {
            'family': self.family, 'c': self.drift,
            'sigma': self.sigma, 'theta': self.theta,
        }


@dataclass(frozen=True)
class OUModel:
    """
    Ornstein-Uhlenbeck process dX = -beta (X - eta) dt + sqrt(2 beta) sigma dW.

    sigma is the stationary standard deviation. A deterministic start sits
    at c0; a random start is drawn from the stationary law N(eta, sigma^2).
    """

    beta: float
    eta: float
    sigma: float
    start: StartKind = StartKind.DETERMINISTIC
    c0: float = 0.0

    family = 'ou'

    def __post_init__(self):
        object.__setattr__(self, 'start', StartKind(self.start))

        if not self.beta > 0:
            raise ConfigError(f"OU beta must be > 0, got {self.beta}")
        if not self.sigma > 0:
            raise ConfigError(f"OU sigma must be > 0, got {self.sigma}")
        if not (np.isfinite(self.eta) and np.isfinite(self.c0)):
            raise ConfigError("OU eta and c0 must be finite")

    @property
    def start_kind(self) -> StartKind:
        return self.start

    @property
    def kappa(self) -> float:
        """beta sigma^2; two OU classes are equivalent iff these agree."""
        return self.beta * self.sigma ** 2

    def mean(self, grid: Grid) -> np.ndarray:
        if self.start is StartKind.RANDOM:
            return np.full(len(grid), float(self.eta))
        return self.eta + (self.c0 - self.eta) * np.exp(-self.beta * grid.points)

    def triangular_spec(self, grid: Grid) -> TriangularSpec:
        t = grid.points
        beta = self.beta
        variance = self.sigma ** 2

        v = np.exp(beta * (1.0 - t))

        if self.start is StartKind.RANDOM:
            u = variance * np.exp(-beta * (1.0 - t))
            du = beta * u
            m = np.full_like(t, float(self.eta))
            dm = np.zeros_like(t)
            d2m = np.zeros_like(t)
        else:
            scale = variance * np.exp(-beta)
            u = scale * (np.exp(beta * t) - np.exp(-beta * t))
            du = scale * beta * (np.exp(beta * t) + np.exp(-beta * t))
            decay = (self.c0 - self.eta) * np.exp(-beta * t)
            m = self.eta + decay
            dm = -beta * decay
            d2m = beta ** 2 * decay

        return TriangularSpec(
            times=t,
            m=m, dm=dm, d2m=d2m,
            u=u, du=du, d2u=beta ** 2 * u,
            v=v, dv=-beta * v, d2v=beta ** 2 * v,
        )

    def sample_paths(self, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
        a = np.exp(-self.beta * grid.delta)
        noise_scale = self.sigma * np.sqrt(1.0 - a ** 2)

        paths = np.empty((n, len(grid)))
        if self.start is StartKind.RANDOM:
            paths[:, 0] = self.eta + self.sigma * rng.standard_normal(n)
        else:
            paths[:, 0] = self.c0

        shocks = rng.standard_normal((n, grid.n_intervals))
        for j in range(grid.n_intervals):
            paths[:, j + 1] = a * paths[:, j] + self.eta * (1.0 - a) + noise_scale * shocks[:, j]

        return paths

    def describe(self) -> Dict[str, Any]:
        return {
            'family': self.family, 'beta': self.beta, 'eta': self.eta,
            'sigma': self.sigma, 'start': self.start.value, 'c0': self.c0,
        }


ClassModel = Union[BrownianModel, OUModel]


def simulate_brownian(model: BrownianModel, with_drift: bool, grid: Grid, seed: SeedLike) -> Curve:
    """One Brownian path; with_drift overrides the model's own flag."""
    model = replace(model, with_drift=bool(with_drift))
    return Curve(grid, model.sample_paths(grid, 1, make_rng(seed))[0])


def simulate_ou(model: OUModel, grid: Grid, seed: SeedLike) -> Curve:
    """One OU path generated with the exact transition."""
    return Curve(grid, model.sample_paths(grid, 1, make_rng(seed))[0])


def sample_labeled(
    model0: ClassModel,
    model1: ClassModel,
    n0: int,
    n1: int,
    prior_p: Optional[float],
    grid: Grid,
    seed: SeedLike
) -> LabeledSample:
    """
    n0 curves of model0 labeled 0 followed by n1 curves of model1 labeled 1.

    Raises:
        StructuralError: If a class count is below 1
    """
    if n0 < 1 or n1 < 1:
        raise StructuralError(f"Both class counts must be >= 1, got n0={n0}, n1={n1}")

    rng = make_rng(seed)
    values = np.vstack([
        model0.sample_paths(grid, int(n0), rng),
        model1.sample_paths(grid, int(n1), rng),
    ])
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])

    return LabeledSample(grid, values, labels, prior_p)


def model_from_dict(data: Dict[str, Any]) -> ClassModel:
    """
    Build a class model from a plain mapping (TOML table or CLI JSON).

    Raises:
        ConfigError: On an unknown family or missing parameters
    """
    params = dict(data)
    family = str(params.pop('family', '')).lower()

    try:
        if family == 'brownian':
            return BrownianModel(
                c=float(params.get('c', 0.0)),
                sigma=float(params['sigma']),
                theta=float(params.get('theta', 0.0)),
                with_drift=bool(params.get('with_drift', True)),
            )
        if family == 'ou':
            return OUModel(
                beta=float(params['beta']),
                eta=float(params.get('eta', 0.0)),
                sigma=float(params['sigma']),
                start=StartKind(params.get('start', 'deterministic')),
                c0=float(params.get('c0', 0.0)),
            )
    except KeyError as e:
        raise ConfigError(f"Model '{family}' is missing parameter {e}") from e
    except ValueError as e:
        raise ConfigError(f"Invalid model parameter: {e}") from e

    raise ConfigError(f"Unknown model family '{family}' (expected 'brownian' or 'ou')")
