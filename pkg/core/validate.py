"""
Rule-based validation of experiment configurations.
Hard violations raise ConfigError; soft problems come back as warnings and
may shrink the classifier roster.
"""

import logging
from typing import Any, Dict, List, Tuple

from core.classifiers.bayes import closed_form_kind
from core.config import ExperimentConfig, RealDataConfig
from core.errors import ConfigError
from core.scenarios import ROSTER
from core.simulate import BrownianModel, OUModel, StartKind


logger = logging.getLogger(__name__)

KAPPA_TOLERANCE = 1e-8


def validate_model_pair(model0, model1) -> List[str]:
    """
    Check that the two class laws are mutually absolutely continuous.

    Returns:
        Warnings about the pair

    Raises:
        ConfigError: If the pair is mutually singular
    """
    warnings = []

    if isinstance(model0, BrownianModel) and isinstance(model1, BrownianModel):
        if model0.sigma != model1.sigma:
            raise ConfigError(
                f"Brownian sigma0={model0.sigma} and sigma1={model1.sigma} differ; "
                f"the class laws are mutually singular"
            )
        if (model0.theta == 0) != (model1.theta == 0):
            raise ConfigError("Brownian starts must both be deterministic or both random")
        if not model0.with_drift or model1.with_drift:
            warnings.append("Brownian pair does not follow the drift-in-class-0 layout")

    elif isinstance(model0, OUModel) and isinstance(model1, OUModel):
        gap = abs(model0.kappa - model1.kappa)
        if gap > KAPPA_TOLERANCE * max(1.0, model0.kappa, model1.kappa):
            raise ConfigError(
                f"OU beta0*sigma0^2={model0.kappa:.6g} and beta1*sigma1^2={model1.kappa:.6g} "
                f"differ; the class laws are mutually singular"
            )
        if model0.start is not model1.start:
            raise ConfigError("OU starts must both be deterministic or both random")
        if model0.start is StartKind.DETERMINISTIC and (model0.c0 != 0 or model1.c0 != 0):
            raise ConfigError("Deterministic OU starts must sit at c0 = 0")

    else:
        warnings.append("Class models come from different families")

    return warnings


def _check_candidates(cv, delta: float) -> None:
    if not cv.h_steps or min(cv.h_steps) < 1:
        raise ConfigError("Bandwidth candidates must be positive grid-step counts")
    if not any(steps * delta < 0.5 for steps in cv.h_steps):
        raise ConfigError("Every bandwidth candidate is >= 1/2 on this grid")
    if not cv.k or min(cv.k) < 1:
        raise ConfigError("k candidates must be >= 1")
    if not cv.d or min(cv.d) < 1:
        raise ConfigError("PLS direction candidates must be >= 1")
    if cv.delta_n is not None and not 0 < cv.delta_n < 1:
        raise ConfigError(f"delta_n must lie in (0, 1), got {cv.delta_n}")


def _check_roster(roster) -> Tuple[str, ...]:
    if not roster:
        raise ConfigError("The classifier roster is empty")
    unknown = [name for name in roster if name not in ROSTER]
    if unknown:
        raise ConfigError(f"Unknown classifiers in roster: {', '.join(unknown)}")
    return tuple(dict.fromkeys(roster))


def validate_experiment_config(cfg: ExperimentConfig) -> Dict[str, Any]:
    """
    Complete validation for a Monte Carlo configuration.

    Returns:
        Dictionary with:
        - roster: Classifiers that can run on this configuration
        - warnings: List of warning messages
    """
    if cfg.runs < 1:
        raise ConfigError(f"runs must be >= 1, got {cfg.runs}")
    if cfg.n_train < 2:
        raise ConfigError(f"n_train must be >= 2 per class, got {cfg.n_train}")
    if cfg.n_test < 1:
        raise ConfigError(f"n_test must be >= 1 per class, got {cfg.n_test}")
    if cfg.n_intervals < 2:
        raise ConfigError(f"N must be >= 2, got {cfg.n_intervals}")
    if not 0 < cfg.prior_p < 1:
        raise ConfigError(f"prior_p must lie in (0, 1), got {cfg.prior_p}")

    roster = list(_check_roster(cfg.roster))
    _check_candidates(cfg.cv, 1.0 / cfg.n_intervals)
    warnings = validate_model_pair(cfg.model0, cfg.model1)

    same_family = cfg.model0.family == cfg.model1.family
    if 'param-plugin' in roster and not (same_family and cfg.model0.start_kind is cfg.model1.start_kind):
        roster.remove('param-plugin')
        warnings.append("param-plugin dropped: the class models do not share one family and start kind")

    if 'bayes' in roster and closed_form_kind(cfg.model0, cfg.model1) is None:
        warnings.append("bayes uses the general log-RN pipeline (no closed form for this pair)")

    if not roster:
        raise ConfigError("No classifier in the roster can run on this configuration")

    for warning in warnings:
        logger.warning(warning)

    return {'roster': tuple(roster), 'warnings': warnings}


def validate_real_data_config(cfg: RealDataConfig) -> Dict[str, Any]:
    """
    Real data has no known models, so bayes and param-plugin are removed.
    """
    roster = list(_check_roster(cfg.roster))
    warnings = []

    for name in ('bayes', 'param-plugin'):
        if name in roster:
            roster.remove(name)
            warnings.append(f"{name} dropped: it needs known class models")

    if not roster:
        raise ConfigError("No classifier in the roster can run on real data")
    if cfg.trim < 0:
        raise ConfigError(f"trim must be >= 0, got {cfg.trim}")
    if cfg.transform not in ('identity', 'log-offset'):
        raise ConfigError(f"Unknown transform '{cfg.transform}'")
    if cfg.transform == 'log-offset' and cfg.offset is None:
        raise ConfigError("The log-offset transform needs an offset")

    for warning in warnings:
        logger.warning(warning)

    return {'roster': tuple(roster), 'warnings': warnings}
