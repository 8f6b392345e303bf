"""
Bayes rule for known class models: the closed forms where they exist,
otherwise the chain-rule log-RN pipeline on the exact triangular specs.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from core.classifiers.base import Classifier
from core.grid import LabeledSample
from core.parametric import (
    bayes_brownian_det, brownian_det_log_rn, brownian_random_log_rn, check_ou_admissible,
    ou_det_log_rn, ou_random_log_rn
)
from core.rn_derivative import classify, compose_chain
from core.simulate import BrownianModel, ClassModel, OUModel, StartKind


logger = logging.getLogger(__name__)

BROWNIAN_DET = 'brownian-det'
BROWNIAN_RANDOM = 'brownian-random'
OU_DET = 'ou-det'
OU_RANDOM = 'ou-random'


def closed_form_kind(model0: ClassModel, model1: ClassModel) -> Optional[str]:
    """Name of the closed-form rule covering this pair, or None."""
    if isinstance(model0, BrownianModel) and isinstance(model1, BrownianModel):
        shape_matches = (
            model0.with_drift and not model1.with_drift
            and model0.sigma == model1.sigma
        )
        if not shape_matches:
            return None
        if model0.theta == 0 and model1.theta == 0:
            return BROWNIAN_DET
        if model0.theta > 0 and model1.theta > 0:
            return BROWNIAN_RANDOM
        return None

    if isinstance(model0, OUModel) and isinstance(model1, OUModel):
        if model0.start is not model1.start:
            return None
        if model0.start is StartKind.RANDOM:
            return OU_RANDOM
        if model0.c0 == 0 and model1.c0 == 0:
            return OU_DET

    return None


class BayesClassifier(Classifier):
    """Optimal rule for known models; fitting only records the grid."""

    name = 'bayes'

    def __init__(self, model0: ClassModel, model1: ClassModel, prior_p: float = 0.5, use_closed_form: bool = True):
        super().__init__()
        self.model0 = model0
        self.model1 = model1
        self.prior_p = prior_p
        self.kind = closed_form_kind(model0, model1) if use_closed_form else None
        self.evaluator = None

        if self.kind == OU_DET:
            check_ou_admissible(model0, model1)

    def _fit(self, train: LabeledSample) -> None:
        if self.kind is None:
            self.evaluator = compose_chain(
                self.model0.triangular_spec(train.grid),
                self.model1.triangular_spec(train.grid),
            )
            logger.debug("Bayes rule uses the general log-RN pipeline")

    def log_rn(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        delta = self.grid.delta

        if self.kind == BROWNIAN_DET:
            return brownian_det_log_rn(values, self.model0.c, self.model0.sigma)
        if self.kind == BROWNIAN_RANDOM:
            m0, m1 = self.model0, self.model1
            return brownian_random_log_rn(values, m0.c, m0.sigma, m0.theta, m1.theta)
        if self.kind == OU_DET:
            return ou_det_log_rn(values, delta, self.model0, self.model1)
        if self.kind == OU_RANDOM:
            return ou_random_log_rn(values, delta, self.model0, self.model1)

        return np.atleast_1d(self.evaluator.evaluate(values))

    def predict(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(values)
        if self.kind == BROWNIAN_DET:
            return np.atleast_1d(bayes_brownian_det(values, self.model0.c, self.model0.sigma, self.prior_p))
        return classify(self.log_rn(values), self.prior_p)

    def hyperparameters(self) -> Dict[str, Any]:
        return {'rule': self.kind or 'log-rn-chain'}
