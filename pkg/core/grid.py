"""
Grid and curve representations plus the quadrature and distance helpers
every other module works with.

Curves live on a shared uniform grid t_0 = 0 < t_1 < ... < t_N = 1.
All objects here are immutable: arrays are stored read-only and derived
quantities are returned as new arrays.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid as _scipy_trapezoid

from core.errors import InsufficientDataError, StructuralError


UNIFORM_TOLERANCE = 1e-9


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid on [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        points = _frozen(np.asarray(self.points, dtype=float).ravel())

        if points.size < 3:
            raise StructuralError(f"Grid needs N >= 2 intervals, got {points.size - 1}")
        if abs(points[0]) > UNIFORM_TOLERANCE or abs(points[-1] - 1.0) > UNIFORM_TOLERANCE:
            raise StructuralError(
                f"Grid must start at 0 and end at 1, got [{points[0]}, {points[-1]}]"
            )

        steps = np.diff(points)
        if np.any(steps <= 0):
            raise StructuralError("Grid points must be strictly increasing")

        expected = 1.0 / (points.size - 1)
        if np.max(np.abs(steps - expected)) > UNIFORM_TOLERANCE:
            raise StructuralError("Only uniform grids are supported")

        object.__setattr__(self, 'points', points)

    @classmethod
    def uniform(cls, n_intervals: int) -> 'Grid':
        """Build the grid with N = n_intervals equal steps."""
        return cls(np.linspace(0.0, 1.0, int(n_intervals) + 1))

    @property
    def n_intervals(self) -> int:
        return self.points.size - 1

    @property
    def delta(self) -> float:
        return 1.0 / self.n_intervals

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.n_intervals == self.n_intervals

    def __hash__(self) -> int:
        return hash(('Grid', self.n_intervals))

    def steps_for(self, h: float) -> int:
        """
        Express a bandwidth as a whole number of grid steps.

        Raises:
            StructuralError: If h is not a positive multiple of delta
        """
        steps = h / self.delta
        rounded = int(round(steps))

        if rounded < 1 or abs(steps - rounded) > 1e-6:
            raise StructuralError(f"Bandwidth h={h} is not a positive multiple of delta={self.delta}")

        return rounded


@dataclass(frozen=True, eq=False)
class Curve:
    """A function observed at every node of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=float).ravel())

        if values.size != len(self.grid):
            raise StructuralError(
                f"Curve has {values.size} values but the grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(values)):
            raise StructuralError("Curve values must be finite")

        object.__setattr__(self, 'values', values)

    def __call__(self, index: int) -> float:
        return float(self.values[index])

    def restrict(self, start: int) -> np.ndarray:
        """Values on the window [t_start, 1]."""
        return self.values[start:]


CurveLike = Union[Curve, np.ndarray, Sequence[float]]


def as_values(x: CurveLike) -> np.ndarray:
    """Return the raw value array behind a Curve or array-like."""
    if isinstance(x, Curve):
        return x.values
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """
    Curves with binary labels on one grid.

    values holds one curve per row. prior_p is P{Y=0}; None means it is
    estimated from the class counts.
    """

    grid: Grid
    values: np.ndarray
    labels: np.ndarray
    prior_p: Optional[float] = None

    def __post_init__(self):
        values = _frozen(np.atleast_2d(np.asarray(self.values, dtype=float)))
        labels = np.asarray(self.labels).astype(int).ravel()
        labels.setflags(write=False)

        if values.shape[0] < 1:
            raise StructuralError("A labeled sample needs at least one curve")
        if values.shape[0] != labels.size:
            raise StructuralError(
                f"{values.shape[0]} curves but {labels.size} labels"
            )
        if values.shape[1] != len(self.grid):
            raise StructuralError(
                f"Curves have {values.shape[1]} values but the grid has {len(self.grid)} points"
            )
        if not np.all(np.isin(labels, (0, 1))):
            raise StructuralError("Labels must be 0 or 1")
        if not np.all(np.isfinite(values)):
            raise StructuralError("Curve values must be finite")
        if self.prior_p is not None and not 0.0 < self.prior_p < 1.0:
            raise StructuralError(f"Prior p must lie in (0, 1), got {self.prior_p}")

        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'labels', labels)

    @classmethod
    def from_curves(
        cls,
        curves: List[Curve],
        labels: Sequence[int],
        prior_p: Optional[float] = None
    ) -> 'LabeledSample':
        if not curves:
            raise StructuralError("A labeled sample needs at least one curve")

        grid = curves[0].grid
        for curve in curves[1:]:
            if curve.grid != grid:
                raise StructuralError("All curves of a sample must share one grid")

        return cls(grid, np.vstack([c.values for c in curves]), np.asarray(labels), prior_p)

    def __len__(self) -> int:
        return self.labels.size

    @property
    def curves(self) -> List[Curve]:
        return [Curve(self.grid, row) for row in self.values]

    def class_values(self, label: int) -> np.ndarray:
        return self.values[self.labels == label]

    def class_count(self, label: int) -> int:
        return int(np.sum(self.labels == label))

    def require_both_classes(self) -> None:
        if self.class_count(0) == 0 or self.class_count(1) == 0:
            raise InsufficientDataError("Training needs curves from both classes")

    def prior(self) -> float:
        """P{Y=0}, either given or estimated from the class proportions."""
        if self.prior_p is not None:
            return float(self.prior_p)

        self.require_both_classes()
        return self.class_count(0) / len(self)

    def without(self, index: int) -> 'LabeledSample':
        """The sample with one curve left out."""
        keep = np.arange(len(self)) != index
        return LabeledSample(self.grid, self.values[keep], self.labels[keep], self.prior_p)

    def with_labels(self, labels: Sequence[int]) -> 'LabeledSample':
        return LabeledSample(self.grid, self.values, np.asarray(labels), self.prior_p)


def integrate(values: np.ndarray, delta: float) -> Union[float, np.ndarray]:
    """Trapezoidal rule along the last axis with spacing delta."""
    return _scipy_trapezoid(values, dx=delta, axis=-1)


def trapezoid(values_on_grid: CurveLike, grid: Grid) -> float:
    """
    Trapezoidal approximation of the integral over [0, 1].

    Args:
        values_on_grid: One value per grid point
        grid: Grid the values live on

    Returns:
        Approximation of the integral of f over [0, 1]

    Raises:
        StructuralError: On length mismatch or non-finite values
    """
    values = as_values(values_on_grid)

    if values.ndim != 1 or values.size != len(grid):
        raise StructuralError(
            f"Expected {len(grid)} values for trapezoid, got shape {values.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise StructuralError("trapezoid needs finite values")

    return float(integrate(values, grid.delta))


def sup_distance(a: Curve, b: Curve) -> float:
    """
    Supremum distance between two curves on the same grid.

    Raises:
        StructuralError: If the grids differ
    """
    if a.grid != b.grid:
        raise StructuralError("sup_distance needs curves on the same grid")

    return float(np.max(np.abs(a.values - b.values)))
