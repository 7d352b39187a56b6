from __future__ import annotations

import numpy as np

from .base import Regressor, as_xy


class LinearRegression(Regressor):
    """Ordinary least squares with intercept.

    Solved on centered data by SVD-based ``lstsq``, which returns the
    minimum-norm weights when the design is rank deficient.
    """

    kind = "lr"

    def fit(self, X, y):
        X, y = as_xy(X, y)
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        self.coef_, *_ = np.linalg.lstsq(X - x_mean, y - y_mean, rcond=None)
        self.intercept_ = float(y_mean - x_mean @ self.coef_)
        self.n_features_ = X.shape[1]
        return self

    def _predict(self, X):
        return X @ self.coef_ + self.intercept_
