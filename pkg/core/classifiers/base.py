"""
Base classifier interface shared by the Bayes, plug-in and k-NN rules.
"""

import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np

from core.errors import StructuralError
from core.grid import Grid, LabeledSample


class Classifier(ABC):
    """Abstract base class for curve classifiers."""

    name = 'classifier'

    def __init__(self):
        self.grid: Optional[Grid] = None
        self.fit_count = 0
        self.total_latency = 0.0
        self.warnings: List[str] = []

    def fit(self, train: LabeledSample) -> 'Classifier':
        """
        Train on a labeled sample; hyperparameters are selected on train only.

        Args:
            train: Training curves

        Returns:
            self
        """
        started = time.perf_counter()
        self.grid = train.grid
        self._fit(train)
        self._track_call(time.perf_counter() - started)
        return self

    @abstractmethod
    def _fit(self, train: LabeledSample) -> None:
        pass

    @abstractmethod
    def predict(self, values: np.ndarray) -> np.ndarray:
        """
        Labels for the curves in values (one per row, on the training grid).
        """
        pass

    def accuracy(self, test: LabeledSample) -> float:
        """Proportion of test curves labeled correctly."""
        if self.grid is None:
            raise StructuralError(f"{self.name} must be fitted before scoring")
        if test.grid != self.grid:
            raise StructuralError("Test curves must live on the training grid")

        predicted = self.predict(test.values)
        return float(np.mean(predicted == test.labels))

    def hyperparameters(self) -> Dict[str, Any]:
        """Values chosen during fitting (empty when nothing is selected)."""
        return {}

    def _track_call(self, latency: float):
        self.fit_count += 1
        self.total_latency += latency

    def get_metrics(self) -> Dict[str, Any]:
        """
        Fit count and latency for the timing view.

        Returns:
            Dictionary with name, fits, total_latency and avg_latency (seconds)
        """
        avg_latency = self.total_latency / self.fit_count if self.fit_count > 0 else 0.0

        return {
            'name': self.name,
            'fits': self.fit_count,
            'total_latency': round(self.total_latency, 3),
            'avg_latency': round(avg_latency, 3),
        }


def create_classifier(
    name: str,
    model0=None,
    model1=None,
    prior_p: Optional[float] = None,
    cv=None
) -> Classifier:
    """
    Factory for the roster names.

    Args:
        name: 'bayes', 'param-plugin', 'nonparam-plugin', 'knn-sup' or 'knn-pls'
        model0: Class-0 model (bayes and param-plugin)
        model1: Class-1 model (bayes and param-plugin)
        prior_p: Known P{Y=0} for the Bayes rule
        cv: CVGrids with the selection candidates

    Returns:
        Unfitted Classifier

    Raises:
        StructuralError: If the name is not recognized or models are missing
    """
    key = name.lower()

    if key == 'bayes':
        from core.classifiers.bayes import BayesClassifier
        if model0 is None or model1 is None:
            raise StructuralError("The Bayes classifier needs both class models")
        return BayesClassifier(model0, model1, 0.5 if prior_p is None else prior_p)

    elif key == 'param-plugin':
        from core.classifiers.plugin import ParametricPluginClassifier
        if model0 is None or model1 is None:
            raise StructuralError("The parametric plug-in needs the declared class models")
        return ParametricPluginClassifier(model0, model1)

    elif key == 'nonparam-plugin':
        from core.classifiers.plugin import NonparamPluginClassifier
        return NonparamPluginClassifier(cv)

    elif key in ('knn-sup', 'knn-pls'):
        from core.classifiers.knn import KnnClassifier
        return KnnClassifier(key.split('-')[1], cv)

    else:
        raise StructuralError(f"Unknown classifier: {name}")
