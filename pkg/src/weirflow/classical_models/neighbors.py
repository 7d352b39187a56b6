from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from .base import Regressor, as_xy


class KNeighborsRegressor(Regressor):
    """Uniform-weight k-nearest-neighbour mean under the Minkowski metric.

    Equal distances are resolved in favour of the lower training index.
    """

    kind = "knn"

    def __init__(self, k: int = 5, p: float = 2.0):
        if k < 1 or p < 1:
            raise ArgumentError(f"need k >= 1 and p >= 1, got k={k}, p={p}")
        self.k = k
        self.p = p

    def fit(self, X, y):
        X, y = as_xy(X, y)
        if X.shape[0] < self.k:
            raise ArgumentError(f"need at least k={self.k} training rows, got {X.shape[0]}")
        self.X_, self.y_ = X.copy(), y.copy()
        self.n_features_ = X.shape[1]
        return self

    def distances(self, X) -> np.ndarray:
        diff = np.abs(X[:, None, :] - self.X_[None, :, :])
        if self.p == 2:
            return np.sqrt((diff * diff).sum(axis=2))
        return (diff**self.p).sum(axis=2) ** (1.0 / self.p)

    def kneighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training rows, nearest first."""
        d = self.distances(as_xy(X))
        return np.argsort(d, axis=1, kind="stable")[:, : self.k]

    def _predict(self, X):
        idx = np.sort(self.kneighbors(X), axis=1)
        return self.y_[idx].mean(axis=1)
