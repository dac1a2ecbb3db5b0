"""Scikit-learn style wrapper around the conv + graph-aggregation regressor.

X is a :class:`~cgsrank.graph.Graph`, not a feature matrix; the estimator
derives the two node features itself. This keeps the familiar
fit/predict/get_params surface while staying honest about the input type.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .graph import Graph, feature_matrix
from .metrics import kendall_tau
from .model import TrainConfig, predict as model_predict, train

__all__ = ["CgsRanker"]


class CgsRanker(RegressorMixin, BaseEstimator):
    """Influence-score regressor over graphs.

    Parameters mirror :class:`~cgsrank.model.TrainConfig`. After ``fit`` the
    trained tensors live in ``weights_`` and the per-epoch loss curve in
    ``loss_curve_``.
    """

    def __init__(
        self,
        learning_rate: float = 0.005,
        epochs: int = 3000,
        seed: int = 0,
        adam_beta1: float = 0.9,
        adam_beta2: float = 0.999,
        adam_eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
        )

    def fit(self, X: Graph, y):
        """Train on one graph and its per-node influence labels."""
        if not isinstance(X, Graph):
            raise TypeError(f"X must be a Graph, got {type(X).__name__}")
        y = np.asarray(y, dtype=np.float64)
        self.weights_, self.loss_curve_ = train(X, feature_matrix(X), y, self._config())
        self.n_features_in_ = 2
        return self

    def predict(self, X: Graph) -> np.ndarray:
        """Per-node influence scores on any graph."""
        check_is_fitted(self, "weights_")
        if not isinstance(X, Graph):
            raise TypeError(f"X must be a Graph, got {type(X).__name__}")
        return model_predict(X, feature_matrix(X), self.weights_).values

    def score(self, X: Graph, y, sample_weight=None) -> float:
        """Kendall tau between predictions and y.

        Rank agreement is the quantity of interest here, so this replaces
        the usual R^2.
        """
        del sample_weight
        return kendall_tau(np.asarray(y, dtype=np.float64), self.predict(X))
