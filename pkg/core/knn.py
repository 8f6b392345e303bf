"""
k-nearest-neighbour classification of curves under the sup metric or a
PLS-score semimetric, with leave-one-out selection of k (and of the number
of PLS directions).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from core.errors import DegenerateProjectionError, SelectionFailureError, StructuralError
from core.grid import Curve, CurveLike, LabeledSample, as_values


logger = logging.getLogger(__name__)

SUP = 'sup'
PLS = 'pls'

PLS_TOLERANCE = 1e-12

DEFAULT_K_CANDIDATES = tuple(range(1, 11))
DEFAULT_D_CANDIDATES = tuple(range(1, 6))


@dataclass(frozen=True, eq=False)
class Semimetric:
    """
    Sup-norm distance, or Euclidean distance between PLS score vectors.

    For PLS, rotations maps centred curve values to scores; its columns are
    nested, so the first d columns give the d-direction semimetric.
    """

    kind: str = SUP
    center: Optional[np.ndarray] = None
    rotations: Optional[np.ndarray] = None
    requested_directions: int = 0
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def directions(self) -> int:
        return 0 if self.rotations is None else self.rotations.shape[1]

    def scores(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        if self.kind == SUP:
            return values
        return (values - self.center) @ self.rotations

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distance table between the rows of a and the rows of b."""
        metric = 'chebyshev' if self.kind == SUP else 'euclidean'
        return cdist(self.scores(a), self.scores(b), metric=metric)

    def __call__(self, x: CurveLike, y: CurveLike) -> float:
        return float(self.pairwise(as_values(x), as_values(y))[0, 0])


SUP_NORM = Semimetric(SUP)


@dataclass(frozen=True)
class KnnConfig:
    k: int
    semimetric: Semimetric = SUP_NORM

    def __post_init__(self):
        if self.k < 1:
            raise StructuralError(f"k must be >= 1, got {self.k}")


def pls_rotations(values: np.ndarray, labels: np.ndarray, directions: int) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """
    Univariate-response PLS by the iterative recursion with deflation.

    Curves are centred, not scaled. Returns the centre, the rotation matrix
    W (P'W)^-1 and notes on early stopping.

    Raises:
        DegenerateProjectionError: If not even the first direction exists
    """
    if directions < 1:
        raise DegenerateProjectionError(f"Cannot extract {directions} PLS directions")

    X = np.atleast_2d(np.asarray(values, dtype=float))
    y = np.asarray(labels, dtype=float).ravel()

    center = X.mean(axis=0)
    X = X - center
    y = y - y.mean()

    weights = []
    loadings = []
    notes = []

    for a in range(directions):
        w = X.T @ y
        norm = np.linalg.norm(w)
        if norm <= PLS_TOLERANCE:
            if a == 0:
                raise DegenerateProjectionError(
                    "PLS weight vector is zero: labels carry no covariance with the curves"
                )
            notes.append(f"PLS stopped after {a} of {directions} directions (zero residual covariance)")
            break

        w = w / norm
        t = X @ w
        tt = float(t @ t)
        if tt <= PLS_TOLERANCE:
            if a == 0:
                raise DegenerateProjectionError("First PLS score vector vanishes")
            notes.append(f"PLS stopped after {a} of {directions} directions (zero score variance)")
            break

        p = X.T @ t / tt
        q = float(y @ t) / tt
        X = X - np.outer(t, p)
        y = y - q * t

        weights.append(w)
        loadings.append(p)

    W = np.column_stack(weights)
    P = np.column_stack(loadings)
    rotations = W @ np.linalg.inv(P.T @ W)

    for note in notes:
        logger.warning(note)

    return center, rotations, notes


def fit_pls_semimetric(train: LabeledSample, directions: int) -> Semimetric:
    """
    Fit a PLS semimetric with the requested number of directions.

    Raises:
        StructuralError: If directions exceeds min(n - 1, N + 1)
        DegenerateProjectionError: If the labels are constant
    """
    limit = min(len(train) - 1, len(train.grid))
    if not 1 <= directions <= limit:
        raise StructuralError(f"PLS directions must lie in [1, {limit}], got {directions}")

    center, rotations, notes = pls_rotations(train.values, train.labels, directions)
    center.setflags(write=False)
    rotations.setflags(write=False)

    return Semimetric(PLS, center, rotations, directions, tuple(notes))


def truncate(semimetric: Semimetric, directions: int) -> Semimetric:
    """The PLS semimetric restricted to its first `directions` scores."""
    if semimetric.kind == SUP or directions >= semimetric.directions:
        return semimetric
    return Semimetric(
        PLS, semimetric.center, semimetric.rotations[:, :directions],
        directions, semimetric.notes
    )


def vote(distances: np.ndarray, labels: np.ndarray, k: int) -> int:
    """
    Majority label among the k closest; distance ties go to the lower index,
    a half-half vote goes to 0.
    """
    nearest = np.argsort(distances, kind='stable')[:k]
    return int(labels[nearest].mean() > 0.5)


def knn_predict(train: LabeledSample, cfg: KnnConfig, values: np.ndarray) -> np.ndarray:
    if cfg.k > len(train):
        raise StructuralError(f"k={cfg.k} exceeds the training size {len(train)}")

    table = cfg.semimetric.pairwise(np.atleast_2d(values), train.values)
    return np.array([vote(row, train.labels, cfg.k) for row in table], dtype=int)


def knn_classify(train: LabeledSample, cfg: KnnConfig, x: CurveLike) -> int:
    return int(knn_predict(train, cfg, as_values(x))[0])


def loo_errors_from_distances(distances: np.ndarray, labels: np.ndarray, ks: Sequence[int]) -> np.ndarray:
    """
    Leave-one-out error rate for each k, given the training distance table.
    """
    table = np.array(distances, dtype=float, copy=True)
    np.fill_diagonal(table, np.inf)

    n = labels.size
    errors = np.zeros(len(ks))
    for i in range(n):
        order = np.argsort(table[i], kind='stable')
        for position, k in enumerate(ks):
            predicted = int(labels[order[:k]].mean() > 0.5)
            errors[position] += predicted != labels[i]

    return errors / n


def _usable_ks(train: LabeledSample, k_candidates: Sequence[int]) -> List[int]:
    ks = sorted(int(k) for k in k_candidates if 1 <= k <= len(train) - 1)
    if not ks:
        raise SelectionFailureError(
            f"No k candidate fits a leave-one-out sample of size {len(train) - 1}"
        )
    return ks


def select_knn_cv(
    train: LabeledSample,
    k_candidates: Sequence[int] = DEFAULT_K_CANDIDATES,
    d_candidates: Optional[Sequence[int]] = None,
    kind: str = SUP
) -> KnnConfig:
    """
    Leave-one-out choice of k (and of the PLS directions for kind='pls').

    Ties go to the smaller k, then to the fewer directions.

    Raises:
        SelectionFailureError: If no candidate can be evaluated
    """
    if kind == SUP:
        ks = _usable_ks(train, k_candidates)
        if len(ks) == 1:
            return KnnConfig(ks[0], SUP_NORM)

        errors = loo_errors_from_distances(SUP_NORM.pairwise(train.values, train.values), train.labels, ks)
        best = int(np.argmin(errors))
        logger.debug("k-NN sup LOO errors %s -> k=%d", dict(zip(ks, errors.round(4))), ks[best])
        return KnnConfig(ks[best], SUP_NORM)

    if kind != PLS:
        raise StructuralError(f"Unknown semimetric kind '{kind}'")

    ks = _usable_ks(train, k_candidates)
    ds = sorted(int(d) for d in (d_candidates or DEFAULT_D_CANDIDATES))
    errors = loo_errors_pls(train, ks, ds)

    best = min(
        ((errors[di, ki], k, d) for di, d in enumerate(ds) for ki, k in enumerate(ks)),
        key=lambda item: (item[0], item[1], item[2])
    )
    _, k, d = best
    logger.debug("k-NN PLS selected k=%d d=%d (LOO error %.4f)", k, d, best[0])

    return KnnConfig(k, fit_pls_semimetric(train, d))


def loo_errors_pls(train: LabeledSample, ks: Sequence[int], ds: Sequence[int]) -> np.ndarray:
    """
    Leave-one-out error table over (d, k), refitting PLS in every fold.

    One fit with max(ds) directions per fold serves every d since scores
    are nested. A fold that cannot provide d directions counts as a
    misclassification for that d.
    """
    n = len(train)
    d_max = max(ds)
    mistakes = np.zeros((len(ds), len(ks)))

    for i in range(n):
        reduced = train.without(i)
        query = train.values[i]
        label = int(train.labels[i])

        try:
            limit = min(len(reduced) - 1, len(train.grid))
            center, rotations, _ = pls_rotations(reduced.values, reduced.labels, min(d_max, limit))
        except DegenerateProjectionError as e:
            logger.debug("PLS fold %d degenerate: %s", i, e)
            mistakes += 1
            continue

        for di, d in enumerate(ds):
            if d > rotations.shape[1]:
                mistakes[di] += 1
                continue

            metric = Semimetric(PLS, center, rotations[:, :d], d)
            order = np.argsort(metric.pairwise(query, reduced.values)[0], kind='stable')
            for ki, k in enumerate(ks):
                predicted = int(reduced.labels[order[:k]].mean() > 0.5)
                mistakes[di, ki] += predicted != label

    return mistakes / n
