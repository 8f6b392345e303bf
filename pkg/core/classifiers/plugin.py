"""
Parametric and nonparametric plug-in classifiers.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from core.classifiers.base import Classifier
from core.config import CVGrids, h_candidates
from core.errors import StructuralError
from core.grid import LabeledSample
from core.nonparam import NonparamPlugin, nonparam_plugin_classifier, select_h_cv
from core.parametric import ParametricPlugin, parametric_plugin_classifier
from core.simulate import ClassModel


logger = logging.getLogger(__name__)


class ParametricPluginClassifier(Classifier):
    """Bayes rule of the declared family with fitted parameters."""

    name = 'param-plugin'

    def __init__(self, model0: ClassModel, model1: ClassModel):
        super().__init__()
        if model0.family != model1.family or model0.start_kind is not model1.start_kind:
            raise StructuralError("The parametric plug-in needs both classes from one family and start kind")

        self.family = model0.family
        self.start_kind = model0.start_kind
        self.rule: Optional[ParametricPlugin] = None

    def _fit(self, train: LabeledSample) -> None:
        self.rule = parametric_plugin_classifier(train, self.family, self.start_kind)

    def predict(self, values: np.ndarray) -> np.ndarray:
        return self.rule.predict(values, self.grid.delta)

    def hyperparameters(self) -> Dict[str, Any]:
        if self.rule is None:
            return {}
        if self.rule.brownian is not None:
            fit = self.rule.brownian
            return {'c': fit.c_hat, 'sigma2': fit.sigma2_hat}
        return {
            f'beta{i}': fit.beta_hat for i, fit in enumerate(self.rule.ou)
        }


class NonparamPluginClassifier(Classifier):
    """Plug-in rule on estimated m, u, v with h chosen by leave-one-out."""

    name = 'nonparam-plugin'

    def __init__(self, cv: Optional[CVGrids] = None):
        super().__init__()
        self.cv = cv or CVGrids()
        self.h: Optional[float] = None
        self.rule: Optional[NonparamPlugin] = None

    def _fit(self, train: LabeledSample) -> None:
        candidates = [h for h in h_candidates(self.cv, train.grid.delta) if h < 0.5]
        if not candidates:
            raise StructuralError("No bandwidth candidate lies below 1/2 on this grid")

        self.h = select_h_cv(train, candidates, self.cv.delta_n)
        self.rule = nonparam_plugin_classifier(train, self.h, self.cv.delta_n)
        logger.debug("Nonparametric plug-in selected h=%.4f", self.h)

    def predict(self, values: np.ndarray) -> np.ndarray:
        return self.rule.predict(values)

    def hyperparameters(self) -> Dict[str, Any]:
        return {} if self.h is None else {'h': self.h}
