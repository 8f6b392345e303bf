"""
Closed-form Bayes rules for the Brownian and Ornstein-Uhlenbeck class pairs,
least-squares parameter estimators and the parametric plug-in classifier.

Every rule is written as a log Radon-Nikodym derivative L(x) = log dmu0/dmu1(x)
and a curve is labeled 1 iff L(x) < log((1-p)/p), p = P{Y=0}.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from core.errors import FitFailureError, InsufficientDataError, SingularityError, StructuralError
from core.grid import Curve, CurveLike, LabeledSample, as_values, integrate
from core.rn_derivative import classify
from core.simulate import BrownianModel, OUModel, StartKind


logger = logging.getLogger(__name__)

ADMISSIBILITY_TOLERANCE = 1e-8


def _matrix(x: CurveLike) -> Tuple[np.ndarray, bool]:
    values = as_values(x)
    return np.atleast_2d(values), values.ndim == 1


def _spacing(x: CurveLike, values: np.ndarray) -> float:
    """Grid spacing of a Curve; raw arrays are taken on the uniform grid of [0, 1]."""
    if isinstance(x, Curve):
        return x.grid.delta
    if values.shape[-1] < 2:
        raise StructuralError("A curve needs at least two nodes")
    return 1.0 / (values.shape[-1] - 1)


def _label(scores: np.ndarray, p: float, single: bool):
    labels = classify(scores, p)
    return int(labels[0]) if single else labels


# Brownian rules

def brownian_det_log_rn(values: np.ndarray, c: float, sigma: float) -> np.ndarray:
    """(c / (2 sigma^2)) (2 x(1) - c); only x(1) enters."""
    values = np.atleast_2d(values)
    return c / (2.0 * sigma ** 2) * (2.0 * values[:, -1] - c)


def brownian_random_log_rn(
    values: np.ndarray,
    c: float,
    sigma: float,
    theta0: float,
    theta1: float
) -> np.ndarray:
    values = np.atleast_2d(values)
    x0 = values[:, 0]
    x1 = values[:, -1]

    return (
        np.log(theta1 / theta0)
        - 0.5 * (1.0 / theta0 ** 2 - 1.0 / theta1 ** 2) * x0 ** 2
        + c / (2.0 * sigma ** 2) * (2.0 * (x1 - x0) - c)
    )


def bayes_brownian_det(x: CurveLike, c: float, sigma: float, p: float = 0.5):
    """
    Bayes rule for drift ct against no drift, both started at 0.

    Label 1 iff c (2 x(1) - c) < 2 sigma^2 log((1-p)/p); with p = 1/2 this
    is x(1) < c/2. sigma only matters when p != 1/2.
    """
    values, single = _matrix(x)
    threshold = 2.0 * sigma ** 2 * (np.log1p(-p) - np.log(p))
    scores = c * (2.0 * values[:, -1] - c)
    labels = (scores < threshold).astype(int)

    return int(labels[0]) if single else labels


def bayes_brownian_random(
    x: CurveLike,
    c: float,
    sigma: float,
    theta0: float,
    theta1: float,
    p: float = 0.5
):
    """
    Bayes rule for Brownian classes with N(0, theta_i^2) starts.

    Raises:
        StructuralError: If a start deviation is not positive
    """
    if theta0 <= 0 or theta1 <= 0:
        raise StructuralError(f"Random-start rule needs theta0, theta1 > 0, got {theta0}, {theta1}")

    values, single = _matrix(x)
    return _label(brownian_random_log_rn(values, c, sigma, theta0, theta1), p, single)


def brownian_bayes_accuracy(c: float, sigma: float) -> float:
    """Exact accuracy Phi(c / (2 sigma)) of the deterministic-start rule at p = 1/2."""
    return float(norm.cdf(c / (2.0 * sigma)))


# Ornstein-Uhlenbeck rules

def check_ou_admissible(params0: OUModel, params1: OUModel) -> None:
    """
    Raises:
        SingularityError: If beta0 sigma0^2 and beta1 sigma1^2 differ
    """
    gap = abs(params0.kappa - params1.kappa)
    if gap > ADMISSIBILITY_TOLERANCE * max(1.0, params0.kappa, params1.kappa):
        raise SingularityError(
            f"beta0*sigma0^2 = {params0.kappa:.6g} differs from beta1*sigma1^2 = "
            f"{params1.kappa:.6g}; the OU classes are mutually singular"
        )


def _ou_parameters(params0: OUModel, params1: OUModel):
    b0, b1 = params0.beta, params1.beta
    e0, e1 = params0.eta, params1.eta
    s0, s1 = params0.sigma ** 2, params1.sigma ** 2
    kappa = 0.5 * (b0 * s0 + b1 * s1)
    return b0, b1, e0, e1, s0, s1, kappa


def ou_det_log_rn(values: np.ndarray, delta: float, params0: OUModel, params1: OUModel) -> np.ndarray:
    """log dmu0/dmu1 for OU classes started deterministically at 0."""
    values = np.atleast_2d(values)
    b0, b1, e0, e1, s0, s1, kappa = _ou_parameters(params0, params1)

    x0 = values[:, 0]
    x1 = values[:, -1]
    integral = integrate(values, delta)
    integral_sq = integrate(values ** 2, delta)

    q = (
        2.0 * (b0 ** 2 * s0 - b1 ** 2 * s1)
        + (b1 - b0) * (x1 ** 2 - x0 ** 2 + (b0 + b1) * integral_sq)
        + 2.0 * (b0 * e0 - b1 * e1) * (x1 - x0)
        + 2.0 * (b0 ** 2 * e0 - b1 ** 2 * e1) * integral
        - (b0 ** 2 * e0 ** 2 - b1 ** 2 * e1 ** 2)
    )

    return q / (4.0 * kappa)


def ou_random_log_rn(values: np.ndarray, delta: float, params0: OUModel, params1: OUModel) -> np.ndarray:
    """log dmu0/dmu1 for OU classes started from their stationary laws."""
    values = np.atleast_2d(values)
    b0, b1, e0, e1, s0, s1, kappa = _ou_parameters(params0, params1)

    x0 = values[:, 0]
    x1 = values[:, -1]
    integral = integrate(values, delta)
    integral_sq = integrate(values ** 2, delta)

    q = (
        2.0 * kappa * np.log(b0 / b1)
        + 2.0 * (b0 ** 2 * s0 - b1 ** 2 * s1)
        + (b1 - b0) * (x0 ** 2 + x1 ** 2 + (b0 + b1) * integral_sq)
        + 2.0 * (b0 * e0 - b1 * e1) * (x0 + x1)
        + 2.0 * (b0 ** 2 * e0 - b1 ** 2 * e1) * integral
        - (2.0 * b0 * e0 ** 2 + b0 ** 2 * e0 ** 2)
        + (2.0 * b1 * e1 ** 2 + b1 ** 2 * e1 ** 2)
    )

    return q / (4.0 * kappa)


def bayes_ou_det(
    x: CurveLike,
    params0: OUModel,
    params1: OUModel,
    p: float = 0.5,
    check_admissible: bool = True
):
    """
    Bayes rule for deterministic-start OU classes.

    Args:
        x: Curve, or raw values on the uniform grid of [0, 1]
        params0: Class-0 OU parameters
        params1: Class-1 OU parameters
        p: P{Y=0}
        check_admissible: Require beta0 sigma0^2 == beta1 sigma1^2

    Raises:
        SingularityError: If the classes are not equivalent and the check is on
    """
    if check_admissible:
        check_ou_admissible(params0, params1)

    values, single = _matrix(x)
    return _label(ou_det_log_rn(values, _spacing(x, values), params0, params1), p, single)


def bayes_ou_random(
    x: CurveLike,
    params0: OUModel,
    params1: OUModel,
    p: float = 0.5
):
    """Bayes rule for stationary-start OU classes."""
    values, single = _matrix(x)
    return _label(ou_random_log_rn(values, _spacing(x, values), params0, params1), p, single)


# Estimators

@dataclass(frozen=True)
class BrownianFit:
    """
    Estimates for the Brownian pair.

    theta2_hat_i are start variances (plugged in where theta_i^2 appears).
    """

    c_hat: float
    sigma2_hat: float
    theta2_hat_0: float
    theta2_hat_1: float

    @property
    def sigma_hat(self) -> float:
        return float(np.sqrt(self.sigma2_hat))


@dataclass(frozen=True)
class OUFit:
    beta_hat: float
    eta_hat: float
    sigma2_hat: float
    start_kind: StartKind
    a_hat: float
    b_hat: float

    def to_model(self) -> OUModel:
        return OUModel(
            beta=self.beta_hat,
            eta=self.eta_hat,
            sigma=float(np.sqrt(self.sigma2_hat)),
            start=self.start_kind,
        )


def fit_brownian(train: LabeledSample, start_kind: StartKind = StartKind.RANDOM) -> BrownianFit:
    """
    Least-squares drift, pooled diffusion variance and start variances.

    c_hat regresses the class-0 mean curve on t without intercept. The
    pooled sigma2_hat divides by n0 + n1 - 1.

    Raises:
        InsufficientDataError: If a class is empty, or has fewer than two
            curves while start variances are needed
    """
    train.require_both_classes()
    t = train.grid.points

    mean0 = train.class_values(0).mean(axis=0)
    c_hat = float(np.sum(mean0 * t) / np.sum(t ** 2))

    theta2 = []
    squares = 0.0
    for label in (0, 1):
        values = train.class_values(label)
        mean = values.mean(axis=0)

        if start_kind is StartKind.RANDOM:
            if values.shape[0] < 2:
                raise InsufficientDataError(
                    f"Class {label} needs at least 2 curves to estimate its start variance"
                )
            theta2.append(float(np.sum((values[:, 0] - mean[0]) ** 2) / (values.shape[0] - 1)))
        else:
            theta2.append(0.0)

        residual = (values[:, -1] - mean[-1]) - (values[:, 0] - mean[0])
        squares += float(np.sum(residual ** 2))

    sigma2_hat = squares / (len(train) - 1) if len(train) > 1 else 0.0
    logger.debug("Brownian fit: c=%.4f sigma2=%.4f theta2=%s", c_hat, sigma2_hat, theta2)

    return BrownianFit(c_hat, sigma2_hat, theta2[0], theta2[1])


def ou_stationary_mean(values: np.ndarray) -> float:
    """Grand mean of every node value; the random-start estimate of eta."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InsufficientDataError("No curve values to average")
    return float(values.mean())


def fit_ou(values: np.ndarray, delta: float, start_kind: StartKind) -> OUFit:
    """
    Least squares on all consecutive pairs X(t_{j+1}) = a X(t_j) + b + u.

    Args:
        values: Curves of one class, one per row
        delta: Grid spacing
        start_kind: Decides how eta is estimated

    Returns:
        OUFit with beta = -log(a)/delta and sigma^2 = sum u^2 / ((1 - a^2)(nN - 2))

    Raises:
        InsufficientDataError: If fewer than three pairs are available
        FitFailureError: If a_hat falls outside (0, 1) or sigma2_hat is not positive
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n_pairs = values.shape[0] * (values.shape[1] - 1)

    if n_pairs < 3:
        raise InsufficientDataError(f"OU fit needs n*N >= 3 transition pairs, got {n_pairs}")

    previous = values[:, :-1].ravel()
    following = values[:, 1:].ravel()

    centered = previous - previous.mean()
    spread = float(np.sum(centered ** 2))
    if spread <= 0:
        raise FitFailureError("OU fit failed: regressor values do not vary")

    a_hat = float(np.sum(centered * (following - following.mean())) / spread)
    b_hat = float(following.mean() - a_hat * previous.mean())

    if not 0.0 < a_hat < 1.0:
        raise FitFailureError(f"OU fit failed: a_hat = {a_hat:.6g} outside (0, 1)")

    residuals = following - a_hat * previous - b_hat
    sigma2_hat = float(np.sum(residuals ** 2) / ((1.0 - a_hat ** 2) * (n_pairs - 2)))

    if not sigma2_hat > 0:
        raise FitFailureError(f"OU fit failed: sigma2_hat = {sigma2_hat:.6g}")

    beta_hat = -np.log(a_hat) / delta
    if start_kind is StartKind.RANDOM:
        eta_hat = ou_stationary_mean(values)
    else:
        eta_hat = b_hat / (1.0 - a_hat)

    return OUFit(float(beta_hat), float(eta_hat), sigma2_hat, start_kind, a_hat, b_hat)


@dataclass(frozen=True)
class ParametricPlugin:
    """
    Bayes rule with fitted parameters substituted in.

    For OU pairs the fitted beta_i sigma_i^2 are used as they are; the rule
    is not forced onto the equivalent family.
    """

    family: str
    start_kind: StartKind
    prior_p: float
    brownian: Optional[BrownianFit] = None
    ou: Optional[Tuple[OUFit, OUFit]] = None

    def log_rn(self, values: np.ndarray, delta: float) -> np.ndarray:
        if self.family == 'brownian':
            fit = self.brownian
            if fit.sigma2_hat <= 0:
                raise FitFailureError("Brownian plug-in needs sigma2_hat > 0")

            if self.start_kind is StartKind.RANDOM:
                if fit.theta2_hat_0 <= 0 or fit.theta2_hat_1 <= 0:
                    raise FitFailureError("Brownian random-start plug-in needs theta2_hat > 0")
                return brownian_random_log_rn(
                    values, fit.c_hat, fit.sigma_hat,
                    np.sqrt(fit.theta2_hat_0), np.sqrt(fit.theta2_hat_1)
                )
            return brownian_det_log_rn(values, fit.c_hat, fit.sigma_hat)

        model0, model1 = (fit.to_model() for fit in self.ou)
        if self.start_kind is StartKind.RANDOM:
            return ou_random_log_rn(values, delta, model0, model1)
        return ou_det_log_rn(values, delta, model0, model1)

    def predict(self, values: np.ndarray, delta: float) -> np.ndarray:
        values = np.atleast_2d(values)

        if self.family == 'brownian' and self.start_kind is StartKind.DETERMINISTIC:
            return np.atleast_1d(
                bayes_brownian_det(values, self.brownian.c_hat, self.brownian.sigma_hat, self.prior_p)
            )

        return classify(self.log_rn(values, delta), self.prior_p)

    def __call__(self, x: Curve) -> int:
        return int(self.predict(x.values, x.grid.delta)[0])


def parametric_plugin_classifier(
    train: LabeledSample,
    family: str,
    start_kind: StartKind
) -> ParametricPlugin:
    """
    Fit the named family on train and bind the matching closed-form rule.

    Raises:
        StructuralError: On an unknown family
        InsufficientDataError, FitFailureError: Propagated from the fits
    """
    train.require_both_classes()
    start_kind = StartKind(start_kind)
    prior = train.prior()

    if family == 'brownian':
        return ParametricPlugin(family, start_kind, prior, brownian=fit_brownian(train, start_kind))

    if family == 'ou':
        fits = tuple(
            fit_ou(train.class_values(label), train.grid.delta, start_kind)
            for label in (0, 1)
        )
        logger.debug(
            "OU fits: class 0 beta=%.4f eta=%.4f sigma2=%.4f; class 1 beta=%.4f eta=%.4f sigma2=%.4f",
            fits[0].beta_hat, fits[0].eta_hat, fits[0].sigma2_hat,
            fits[1].beta_hat, fits[1].eta_hat, fits[1].sigma2_hat,
        )
        return ParametricPlugin(family, start_kind, prior, ou=fits)

    raise StructuralError(f"Unknown parametric family '{family}'")
