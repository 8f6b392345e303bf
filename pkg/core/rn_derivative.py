"""
Radon-Nikodym derivatives between Gaussian measures with triangular
covariance Gamma(s,t) = u(min(s,t)) v(max(s,t)), the regression function
eta and the resulting classification decision.

Everything is computed in log space. Stieltjes integrals against F and G
are evaluated as Riemann integrals of the quotient-rule derivatives F', G'
tabulated on the grid (trapezoidal rule).

Two elementary factors are provided:
- ZeroMeanFactor:  log dP(0,Gamma0)/dP(0,Gamma1)
- MeanShiftFactor: log dP(m,Gamma)/dP(0,Gamma)
and compose_chain() multiplies them as
dP(m0,G0)/dP(m1,G1) = dP(m0,G0)/dP(0,G0) * dP(0,G0)/dP(0,G1) * dP(0,G1)/dP(m1,G1).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np
from scipy.special import expit

from core.errors import AdmissibilityError, SingularityError, StructuralError
from core.grid import CurveLike, as_values, integrate


logger = logging.getLogger(__name__)

# |v u' - u v'| must exceed this at every node
SINGULARITY_TOLERANCE = 1e-10
# u(0) counts as zero below ZERO_TOLERANCE * max|u|
ZERO_TOLERANCE = 1e-10
V_TOLERANCE = 1e-10
MEAN_TOLERANCE = 1e-8
NORMALIZATION_TOLERANCE = 1e-6

SINGULAR_HINT = "the two measures may be mutually singular"

_SPEC_ARRAYS = ('m', 'dm', 'd2m', 'u', 'du', 'd2u', 'v', 'dv', 'd2v')


@dataclass(frozen=True, eq=False)
class TriangularSpec:
    """
    Tabulated mean and covariance factors of one Gaussian class.

    All arrays share the node times in `times` (uniform spacing). v is
    normalised so that v at the last node equals 1.
    """

    times: np.ndarray
    m: np.ndarray
    dm: np.ndarray
    d2m: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)

        if times.size < 2:
            raise StructuralError("A triangular spec needs at least two nodes")

        for name in _SPEC_ARRAYS:
            array = np.array(getattr(self, name), dtype=float).ravel()
            if array.size != times.size:
                raise StructuralError(
                    f"Spec array '{name}' has {array.size} values, expected {times.size}"
                )
            if not np.all(np.isfinite(array)):
                raise StructuralError(f"Spec array '{name}' contains non-finite values")
            array.setflags(write=False)
            object.__setattr__(self, name, array)

        if np.min(self.v) <= V_TOLERANCE:
            raise SingularityError(
                f"v must stay bounded away from 0, min v = {np.min(self.v):.3g}"
            )
        if abs(self.v[-1] - 1.0) > NORMALIZATION_TOLERANCE:
            raise StructuralError(f"v must be normalised to v(1) = 1, got {self.v[-1]}")

        self.check_start_mean()

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def u_zero_at_start(self) -> bool:
        scale = max(float(np.max(np.abs(self.u))), np.finfo(float).tiny)
        return abs(self.u[0]) <= ZERO_TOLERANCE * scale

    def check_start_mean(self) -> None:
        """u(0) = 0 forces m(0) = 0."""
        if self.u_zero_at_start:
            scale = max(1.0, float(np.max(np.abs(self.m))))
            if abs(self.m[0]) > MEAN_TOLERANCE * scale:
                raise AdmissibilityError(
                    f"u(0) = 0 requires m(0) = 0, got m(0) = {self.m[0]:.6g}"
                )

    def restrict(self, start: int) -> 'TriangularSpec':
        """The same spec on the window [t_start, 1]."""
        if start == 0:
            return self
        if not 0 <= start < self.times.size - 1:
            raise StructuralError(f"Window start {start} leaves fewer than two nodes")

        return TriangularSpec(
            self.times[start:],
            *(getattr(self, name)[start:] for name in _SPEC_ARRAYS)
        )


def _denominator(v, du, u, dv, what: str) -> np.ndarray:
    denominator = v * du - u * dv
    smallest = float(np.min(np.abs(denominator)))

    if smallest <= SINGULARITY_TOLERANCE:
        raise SingularityError(
            f"{what} vanishes on the grid (min |.| = {smallest:.3g}); {SINGULAR_HINT}"
        )

    return denominator


def _curve_matrix(x: Union[CurveLike, np.ndarray], n_nodes: int, start: int = 0) -> Tuple[np.ndarray, bool]:
    values = as_values(x)
    single = values.ndim == 1
    values = np.atleast_2d(values)

    if values.shape[-1] == n_nodes + start:
        values = values[:, start:]
    elif values.shape[-1] != n_nodes:
        raise StructuralError(
            f"Curve has {values.shape[-1]} values, expected {n_nodes} (window start {start})"
        )

    return values, single


class ZeroMeanFactor:
    """log dP(0,Gamma0)/dP(0,Gamma1) for two triangular covariances."""

    def __init__(self, spec0: TriangularSpec, spec1: TriangularSpec):
        if spec0.times.size != spec1.times.size:
            raise StructuralError("Both specs must share one grid")
        if spec0.u_zero_at_start != spec1.u_zero_at_start:
            raise AdmissibilityError(
                "u0(0) = 0 and u1(0) = 0 must hold together"
            )

        self.delta = spec0.delta
        self.n_nodes = spec0.times.size
        self.u_zero_at_start = spec0.u_zero_at_start

        denominator = _denominator(spec1.v, spec1.du, spec1.u, spec1.dv, "v1 u1' - u1 v1'")

        # F = (v1 v0' - v0 v1') / (v1 u1' - u1 v1'), F' by the quotient rule
        numerator = spec1.v * spec0.dv - spec0.v * spec1.dv
        d_numerator = spec1.v * spec0.d2v - spec0.v * spec1.d2v
        d_denominator = spec1.v * spec1.d2u - spec1.u * spec1.d2v

        F = numerator / denominator
        dF = (d_numerator * denominator - numerator * d_denominator) / denominator ** 2

        v_product = spec0.v * spec1.v
        self.F = F
        self.weight = dF / v_product
        self.C2 = F[-1] / v_product[-1]

        if self.u_zero_at_start:
            ratio = (spec0.v[0] * spec1.v[-1]) / (spec0.v[-1] * spec1.v[0])
            C4 = 0.0
        else:
            ratio = (spec1.u[0] * spec1.v[-1]) / (spec0.v[-1] * spec0.u[0])
            C4 = (spec0.v[0] * spec0.u[0] - spec1.u[0] * spec1.v[0]) / (
                spec1.v[0] * spec0.v[0] * spec0.u[0] * spec1.u[0]
            )

        if not ratio > 0:
            raise AdmissibilityError(f"C1 needs a positive argument, got {ratio:.6g}")

        self.log_C1 = 0.5 * float(np.log(ratio))
        self.C4 = float(C4)
        self.C3 = self.C4 - F[0] / v_product[0]

    def evaluate(self, x, start: int = 0) -> Union[float, np.ndarray]:
        values, single = _curve_matrix(x, self.n_nodes, start)

        quadratic = (
            self.C3 * values[:, 0] ** 2
            + self.C2 * values[:, -1] ** 2
            - integrate(values ** 2 * self.weight, self.delta)
        )
        result = self.log_C1 + 0.5 * quadratic

        return float(result[0]) if single else result


class MeanShiftFactor:
    """log dP(m,Gamma)/dP(0,Gamma) for a triangular covariance."""

    def __init__(self, spec: TriangularSpec):
        spec.check_start_mean()

        self.delta = spec.delta
        self.n_nodes = spec.times.size

        denominator = _denominator(spec.v, spec.du, spec.u, spec.dv, "v u' - u v'")

        # G = (v m' - m v') / (v u' - u v')
        numerator = spec.v * spec.dm - spec.m * spec.dv
        d_numerator = spec.v * spec.d2m - spec.m * spec.d2v
        d_denominator = spec.v * spec.d2u - spec.u * spec.d2v

        G = numerator / denominator
        dG = (d_numerator * denominator - numerator * d_denominator) / denominator ** 2

        if spec.u_zero_at_start:
            D2 = 0.0
            D3 = 0.0
        else:
            variance0 = spec.u[0] * spec.v[0]
            D2 = spec.m[0] / variance0
            D3 = -spec.m[0] ** 2 / (2.0 * variance0)

        # (m/v)' = (v m' - m v') / v^2
        stieltjes = integrate(G * numerator / spec.v ** 2, self.delta)

        self.G = G
        self.weight = dG / spec.v
        self.D1 = float(D3 - 0.5 * stieltjes)
        self.start_coefficient = float(D2 - G[0] / spec.v[0])
        self.end_coefficient = float(G[-1] / spec.v[-1])

    def evaluate(self, x, start: int = 0) -> Union[float, np.ndarray]:
        values, single = _curve_matrix(x, self.n_nodes, start)

        result = (
            self.D1
            + self.start_coefficient * values[:, 0]
            + self.end_coefficient * values[:, -1]
            - integrate(values * self.weight, self.delta)
        )

        return float(result[0]) if single else result


@dataclass(frozen=True)
class LogRnEvaluator:
    """
    Signed sum of elementary log-RN factors.

    start is the index of the first grid node of the evaluation window;
    full-grid curves are cut to that window before evaluation.
    """

    factors: List[Tuple[int, object]] = field(default_factory=list)
    start: int = 0

    def evaluate(self, x) -> Union[float, np.ndarray]:
        total = None
        for sign, factor in self.factors:
            term = sign * np.asarray(factor.evaluate(x, self.start))
            total = term if total is None else total + term

        if total is None:
            values, single = _curve_matrix(x, as_values(x).shape[-1])
            return 0.0 if single else np.zeros(values.shape[0])

        return float(total) if np.ndim(total) == 0 else total

    def __call__(self, x) -> Union[float, np.ndarray]:
        return self.evaluate(x)


def log_rn_zero_mean(spec0: TriangularSpec, spec1: TriangularSpec, x: CurveLike) -> float:
    """
    log dP(0,Gamma0)/dP(0,Gamma1)(x); the means of the specs are ignored.

    Raises:
        AdmissibilityError: If exactly one of u0(0), u1(0) is zero
        SingularityError: If v1 u1' - u1 v1' vanishes on the grid
    """
    return ZeroMeanFactor(spec0, spec1).evaluate(x)


def log_rn_mean_shift(spec: TriangularSpec, x: CurveLike) -> float:
    """
    log dP(m,Gamma)/dP(0,Gamma)(x) for the mean and covariance in spec.

    Raises:
        AdmissibilityError: If u(0) = 0 while m(0) != 0
        SingularityError: If v u' - u v' vanishes on the grid
    """
    return MeanShiftFactor(spec).evaluate(x)


def compose_chain(spec0: TriangularSpec, spec1: TriangularSpec, start: int = 0) -> LogRnEvaluator:
    """
    Build the evaluator of log dmu0/dmu1 through the chain rule.

    Args:
        spec0: Class-0 mean and covariance factors on the full grid
        spec1: Class-1 mean and covariance factors on the full grid
        start: First node of the evaluation window (0 = whole interval)

    Returns:
        LogRnEvaluator applying mean shift 0, covariance change, minus mean shift 1
    """
    window0 = spec0.restrict(start)
    window1 = spec1.restrict(start)

    factors = [
        (1, MeanShiftFactor(window0)),
        (1, ZeroMeanFactor(window0, window1)),
        (-1, MeanShiftFactor(window1)),
    ]
    logger.debug("Composed log-RN chain on window starting at node %d", start)

    return LogRnEvaluator(factors, start)


def _prior_log_odds(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise StructuralError(f"Prior p must lie in (0, 1), got {p}")
    return float(np.log(p) - np.log1p(-p))


def eta(log_rn, p: float):
    """
    Regression function (1-p) / (p exp(log_rn) + 1 - p).

    Evaluated as expit(-(log_rn + log(p/(1-p)))) so huge |log_rn| neither
    overflows nor leaves (0, 1) by more than underflow.
    """
    z = np.asarray(log_rn, dtype=float) + _prior_log_odds(p)
    result = expit(-z)
    return float(result) if np.ndim(result) == 0 else result


def classify(log_rn, p: float):
    """
    Label 1 iff eta > 1/2, i.e. iff exp(log_rn) < (1-p)/p. Ties go to 0.
    """
    threshold = -_prior_log_odds(p)
    labels = (np.asarray(log_rn, dtype=float) < threshold).astype(int)
    return int(labels) if np.ndim(labels) == 0 else labels
