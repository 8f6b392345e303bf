"""
Nonparametric estimation of the class mean and triangular covariance
factors, and the plug-in classifier built on them.

Derivatives are estimated with finite differences of bandwidth h (a whole
number of grid steps). The factor v is estimated either from the section
Gamma(0, .) when u(0) > 0, or as sigma^2 / u on [delta_n, 1] with a
quadratic extension below delta_n when u(0) = 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    FuncGaussError, InsufficientDataError, RegimeError,
    SelectionFailureError, SingularityError, StructuralError
)
from core.grid import Grid, LabeledSample
from core.rn_derivative import LogRnEvaluator, TriangularSpec, classify, compose_chain


logger = logging.getLogger(__name__)

# u(0) = 0 regime when sigma2_hat(0) < REGIME_THRESHOLD * max sigma2_hat
REGIME_THRESHOLD = 1e-3
U_TOLERANCE = 1e-10

REGIME_POSITIVE = 'u0_positive'
REGIME_ZERO = 'u0_zero'


@dataclass(frozen=True)
class SmoothingParams:
    """
    h is the finite-difference bandwidth; delta_n the cut below which v is
    extrapolated in the u(0) = 0 regime (None: max(2h, n^(-1/25))).
    """

    h: float
    delta_n: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.h < 0.5:
            raise StructuralError(f"Bandwidth h must lie in (0, 1/2), got {self.h}")
        if self.delta_n is not None and not 0.0 < self.delta_n < 1.0:
            raise StructuralError(f"delta_n must lie in (0, 1), got {self.delta_n}")

    def resolve_delta_n(self, n: int) -> float:
        if self.delta_n is not None:
            return float(self.delta_n)
        return default_delta_n(self.h, n)


def default_delta_n(h: float, n: int) -> float:
    return max(2.0 * h, float(n) ** (-1.0 / 25.0))


def snap_delta_n(delta_n: float, grid: Grid) -> int:
    """
    Index of the first grid node at or above delta_n.

    Raises:
        StructuralError: If that node is the last one
    """
    index = int(math.ceil(delta_n / grid.delta - 1e-9))
    if index >= grid.n_intervals:
        raise StructuralError(f"delta_n={delta_n} leaves no room below t=1 on this grid")
    return max(index, 1)


def mean_hat(values: np.ndarray) -> np.ndarray:
    """Pointwise sample mean of the curves (one per row)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == 0:
        raise StructuralError("mean_hat needs at least one curve")
    return values.mean(axis=0)


def _bandwidth_steps(grid: Grid, h: float) -> int:
    if not h < 0.5:
        raise StructuralError(f"Bandwidth h must be < 1/2, got {h}")
    return grid.steps_for(h)


def fd_first(f: np.ndarray, grid: Grid, h: float) -> np.ndarray:
    """
    First derivative estimate at every node.

    Central difference (f(t+h) - f(t-h)) / 2h inside [h, 1-h];
    (f(t+h) - f(0)) / (h+t) on [0, h) and its mirror image on (1-h, 1].
    """
    f = np.asarray(f, dtype=float)
    k = _bandwidth_steps(grid, h)
    t = grid.points
    last = f.size - 1

    result = np.empty_like(f)
    result[k:last - k + 1] = (f[2 * k:] - f[:last - 2 * k + 1]) / (2.0 * h)

    left = np.arange(k)
    result[left] = (f[left + k] - f[0]) / (h + t[left])

    right = np.arange(last - k + 1, last + 1)
    result[right] = (f[last] - f[right - k]) / (h + 1.0 - t[right])

    return result


def fd_second(f: np.ndarray, grid: Grid, h: float) -> np.ndarray:
    """
    Second derivative estimate at every node.

    Central (f(t+h) + f(t-h) - 2 f(t)) / h^2 inside; near the ends the
    stencil is re-centred at gamma = (t+h)/2 (mirrored on the right), with
    f(gamma) linearly interpolated between nodes.
    """
    f = np.asarray(f, dtype=float)
    k = _bandwidth_steps(grid, h)
    t = grid.points
    last = f.size - 1

    result = np.empty_like(f)
    result[k:last - k + 1] = (f[2 * k:] + f[:last - 2 * k + 1] - 2.0 * f[k:last - k + 1]) / h ** 2

    left = np.arange(k)
    gamma = (t[left] + h) / 2.0
    result[left] = (f[left + k] + f[0] - 2.0 * np.interp(gamma, t, f)) / gamma ** 2

    right = np.arange(last - k + 1, last + 1)
    half_width = (1.0 - t[right] + h) / 2.0
    centre = 1.0 - half_width
    result[right] = (f[last] + f[right - k] - 2.0 * np.interp(centre, t, f)) / half_width ** 2

    return result


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Empirical covariance table (divisor n) with its sections."""

    table: np.ndarray

    @property
    def u_section(self) -> np.ndarray:
        """Gamma(., 1) = u."""
        return self.table[:, -1]

    @property
    def start_section(self) -> np.ndarray:
        """Gamma(0, .) = u(0) v."""
        return self.table[0, :]

    @property
    def variance(self) -> np.ndarray:
        return np.diag(self.table).copy()


def cov_hat(values: np.ndarray) -> CovarianceEstimate:
    """
    Raises:
        InsufficientDataError: If fewer than two curves are given
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n = values.shape[0]

    if n < 2:
        raise InsufficientDataError(f"Covariance estimation needs n >= 2 curves, got {n}")

    centered = values - values.mean(axis=0)
    table = centered.T @ centered / n
    table = 0.5 * (table + table.T)
    table.setflags(write=False)

    return CovarianceEstimate(table)


def _normalise(u: Tuple[np.ndarray, ...], v: Tuple[np.ndarray, ...]):
    """Rescale u up and v down by v(1) so that v(1) = 1."""
    scale = v[0][-1]
    if not scale > 0:
        raise SingularityError(f"Estimated v(1) = {scale:.6g} is not positive")
    return tuple(part * scale for part in u), tuple(part / scale for part in v)


def estimate_v_positive(
    cov: CovarianceEstimate,
    grid: Grid,
    h: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    v = Gamma(0, .) / u(0) with finite-difference derivatives.

    Raises:
        RegimeError: If u_hat(0) is not clearly positive
    """
    u = cov.u_section
    u0 = u[0]
    scale = max(float(np.max(np.abs(u))), np.finfo(float).tiny)

    if u0 <= U_TOLERANCE * scale:
        raise RegimeError(
            f"u_hat(0) = {u0:.3g} is not positive; use the delta_n estimator for the u(0) = 0 regime"
        )

    v = cov.start_section / u0
    return v, fd_first(v, grid, h), fd_second(v, grid, h)


def estimate_v_zero(
    u: Sequence[np.ndarray],
    variance: Sequence[np.ndarray],
    grid: Grid,
    delta_n: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    v = sigma^2 / u on [delta_n, 1], quadratic Taylor extension below.

    Args:
        u: (u_hat, u_hat', u_hat'')
        variance: (sigma2_hat, sigma2_hat', sigma2_hat'')
        grid: Grid the tables live on
        delta_n: Cut point, snapped up to the next node

    Raises:
        SingularityError: If u_hat is not positive somewhere on [delta_n, 1]
    """
    u0, u1, u2 = (np.asarray(part, dtype=float) for part in u)
    s0, s1, s2 = (np.asarray(part, dtype=float) for part in variance)
    cut = snap_delta_n(delta_n, grid)

    scale = max(float(np.max(np.abs(u0))), np.finfo(float).tiny)
    window = slice(cut, None)
    if np.min(u0[window]) <= U_TOLERANCE * scale:
        raise SingularityError(
            f"u_hat vanishes on [{grid.points[cut]:.4g}, 1]; cannot form sigma^2 / u"
        )

    v = np.empty_like(u0)
    dv = np.empty_like(u0)
    d2v = np.empty_like(u0)

    uw, u1w, u2w = u0[window], u1[window], u2[window]
    sw, s1w, s2w = s0[window], s1[window], s2[window]
    cross = s1w * uw - u1w * sw

    v[window] = sw / uw
    dv[window] = cross / uw ** 2
    d2v[window] = (uw * (s2w * uw - u2w * sw) - 2.0 * u1w * cross) / uw ** 3

    offset = grid.points[:cut] - grid.points[cut]
    v[:cut] = v[cut] + offset * dv[cut] + 0.5 * offset ** 2 * d2v[cut]
    dv[:cut] = dv[cut] + offset * d2v[cut]
    d2v[:cut] = d2v[cut]

    return v, dv, d2v


@dataclass(frozen=True)
class TriangularCovEstimate:
    spec: TriangularSpec
    regime: str
    params: SmoothingParams
    delta_n: Optional[float] = None


def detect_regime(variance: np.ndarray) -> str:
    peak = float(np.max(variance))
    if peak <= 0 or variance[0] < REGIME_THRESHOLD * peak:
        return REGIME_ZERO
    return REGIME_POSITIVE


def estimate_class_spec(values: np.ndarray, grid: Grid, params: SmoothingParams) -> TriangularCovEstimate:
    """
    Estimate m, u, v and two derivatives each from the curves of one class.

    Raises:
        InsufficientDataError: If fewer than two curves are given
        SingularityError, RegimeError: From the v estimators
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    h = params.h

    m = mean_hat(values)
    cov = cov_hat(values)
    u = cov.u_section
    u_parts = (u, fd_first(u, grid, h), fd_second(u, grid, h))

    variance = cov.variance
    regime = detect_regime(variance)
    delta_n = None

    if regime == REGIME_POSITIVE:
        v_parts = estimate_v_positive(cov, grid, h)
    else:
        delta_n = params.resolve_delta_n(values.shape[0])
        variance_parts = (variance, fd_first(variance, grid, h), fd_second(variance, grid, h))
        v_parts = estimate_v_zero(u_parts, variance_parts, grid, delta_n)

    u_parts, v_parts = _normalise(u_parts, v_parts)

    spec = TriangularSpec(
        grid.points,
        m, fd_first(m, grid, h), fd_second(m, grid, h),
        *u_parts, *v_parts
    )

    return TriangularCovEstimate(spec, regime, params, delta_n)


@dataclass(frozen=True)
class NonparamPlugin:
    """Chain-rule log-RN evaluator built from estimated specs, thresholded at the prior."""

    evaluator: LogRnEvaluator
    prior_p: float
    estimates: Tuple[TriangularCovEstimate, TriangularCovEstimate]
    left_cut: float

    def log_rn(self, values: np.ndarray) -> np.ndarray:
        return np.atleast_1d(self.evaluator.evaluate(np.atleast_2d(values)))

    def predict(self, values: np.ndarray) -> np.ndarray:
        return classify(self.log_rn(values), self.prior_p)

    def __call__(self, x) -> int:
        return int(self.predict(np.asarray(getattr(x, 'values', x)))[0])


def _window_start(grid: Grid, left_cut: float) -> int:
    if left_cut == 0:
        return 0
    return grid.steps_for(left_cut)


def _build_plugin(
    estimates: Tuple[TriangularCovEstimate, TriangularCovEstimate],
    grid: Grid,
    prior: float,
    left_cut: float
) -> NonparamPlugin:
    evaluator = compose_chain(estimates[0].spec, estimates[1].spec, _window_start(grid, left_cut))
    return NonparamPlugin(evaluator, prior, estimates, left_cut)


def _check_class_sizes(train: LabeledSample) -> None:
    train.require_both_classes()
    for label in (0, 1):
        if train.class_count(label) < 2:
            raise InsufficientDataError(
                f"Class {label} needs at least 2 curves for covariance estimation"
            )


def nonparam_plugin_classifier(
    train: LabeledSample,
    h: float,
    delta_n: Optional[float] = None,
    left_cut: Optional[float] = None
) -> NonparamPlugin:
    """
    Fit the nonparametric plug-in rule.

    Args:
        train: Labeled training curves, both classes with n_i >= 2
        h: Finite-difference bandwidth, a multiple of the grid spacing
        delta_n: Cut for the u(0) = 0 regime (default max(2h, n_i^(-1/25)))
        left_cut: Start of the evaluation window (default h)

    Returns:
        NonparamPlugin classifying curves on [left_cut, 1]
    """
    _check_class_sizes(train)
    params = SmoothingParams(h, delta_n)
    left_cut = h if left_cut is None else left_cut

    estimates = tuple(
        estimate_class_spec(train.class_values(label), train.grid, params)
        for label in (0, 1)
    )
    logger.debug(
        "Nonparametric fit h=%.4f regimes=%s/%s",
        h, estimates[0].regime, estimates[1].regime
    )

    return _build_plugin(estimates, train.grid, train.prior(), left_cut)


def loo_errors_nonparam(
    train: LabeledSample,
    h: float,
    delta_n: Optional[float] = None
) -> float:
    """
    Leave-one-out misclassification rate of the plug-in rule with bandwidth h.

    Removing curve i only changes the estimate of its own class, so the other
    class is fitted once. A fold that raises counts as a misclassification.

    Raises:
        FuncGaussError: If the full-sample class estimates fail or every fold fails
    """
    _check_class_sizes(train)
    params = SmoothingParams(h, delta_n)
    grid = train.grid

    full = [estimate_class_spec(train.class_values(label), grid, params) for label in (0, 1)]

    mistakes = 0
    failures = 0
    for i in range(len(train)):
        label = int(train.labels[i])
        reduced = train.without(i)

        try:
            estimates = list(full)
            estimates[label] = estimate_class_spec(reduced.class_values(label), grid, params)
            plugin = _build_plugin(tuple(estimates), grid, reduced.prior(), h)
            predicted = int(plugin.predict(train.values[i])[0])
        except FuncGaussError as e:
            logger.debug("LOO fold %d failed for h=%.4f: %s", i, h, e)
            failures += 1
            mistakes += 1
            continue

        mistakes += int(predicted != label)

    if failures == len(train):
        raise SelectionFailureError(f"Every leave-one-out fold failed for h={h}")

    return mistakes / len(train)


def default_h_candidates(grid: Grid) -> List[float]:
    """2, 4, ..., 20 grid steps, kept below 1/2."""
    return [steps * grid.delta for steps in range(2, 21, 2) if steps * grid.delta < 0.5]


def select_h_cv(
    train: LabeledSample,
    candidate_hs: Optional[Sequence[float]] = None,
    delta_n: Optional[float] = None
) -> float:
    """
    Bandwidth with the smallest leave-one-out error; ties go to the smallest h.

    Raises:
        SelectionFailureError: If every candidate errors out
    """
    candidates = sorted(candidate_hs) if candidate_hs is not None else default_h_candidates(train.grid)
    if not candidates:
        raise SelectionFailureError("No bandwidth candidates to select from")
    if len(candidates) == 1:
        return float(candidates[0])

    best_h = None
    best_error = math.inf
    for h in candidates:
        try:
            error = loo_errors_nonparam(train, h, delta_n)
        except FuncGaussError as e:
            logger.debug("Bandwidth h=%.4f rejected: %s", h, e)
            continue

        logger.debug("Bandwidth h=%.4f LOO error %.4f", h, error)
        if error < best_error:
            best_h, best_error = h, error

    if best_h is None:
        raise SelectionFailureError(f"All {len(candidates)} bandwidth candidates failed")

    return float(best_h)
