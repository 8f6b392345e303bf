"""
k-NN classifiers under the sup metric and the PLS semimetric.
"""

from typing import Any, Dict, Optional

import numpy as np

from core.classifiers.base import Classifier
from core.config import CVGrids
from core.grid import LabeledSample
from core.knn import PLS, KnnConfig, knn_predict, select_knn_cv


class KnnClassifier(Classifier):

    def __init__(self, kind: str, cv: Optional[CVGrids] = None):
        super().__init__()
        self.kind = kind
        self.name = f'knn-{kind}'
        self.cv = cv or CVGrids()
        self.config: Optional[KnnConfig] = None
        self.train: Optional[LabeledSample] = None

    def _fit(self, train: LabeledSample) -> None:
        self.config = select_knn_cv(train, self.cv.k, self.cv.d, self.kind)
        self.train = train
        self.warnings.extend(self.config.semimetric.notes)

    def predict(self, values: np.ndarray) -> np.ndarray:
        return knn_predict(self.train, self.config, values)

    def hyperparameters(self) -> Dict[str, Any]:
        if self.config is None:
            return {}
        chosen = {'k': self.config.k}
        if self.kind == PLS:
            chosen['d'] = self.config.semimetric.directions
        return chosen
