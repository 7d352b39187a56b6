from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ShapeError


def as_xy(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ArgumentError("feature matrix contains non-finite values")
    if y is None:
        return X
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} rows but {y.shape[0]} targets")
    if not np.all(np.isfinite(y)):
        raise ArgumentError("targets contain non-finite values")
    return X, y


class Regressor:
    """Fit on a training split, predict on feature rows."""

    kind = ""
    n_features_: int | None = None

    def fit(self, X, y) -> "Regressor":
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        X = as_xy(X)
        if self.n_features_ is None:
            raise ArgumentError(f"{self.kind} model is not fitted")
        if X.shape[1] != self.n_features_:
            raise ShapeError(f"{self.kind} model was fitted on {self.n_features_} columns, got {X.shape[1]}")
        return self._predict(X)

    def _predict(self, X) -> np.ndarray:
        raise NotImplementedError
