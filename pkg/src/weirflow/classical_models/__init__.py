"""Classical regressors: linear, k-nearest neighbours, tree, forest and SVR."""

from __future__ import annotations

from ..errors import ArgumentError
from .base import Regressor
from .linear import LinearRegression
from .neighbors import KNeighborsRegressor
from .svr import SVR
from .tree import DecisionTreeRegressor, RandomForestRegressor

NAMES = ("lr", "rf", "svm", "knn", "dt")


def fit_linear_regression(X, y) -> LinearRegression:
    return LinearRegression().fit(X, y)


def fit_knn(X, y, k: int = 5, p: float = 2.0) -> KNeighborsRegressor:
    return KNeighborsRegressor(k=k, p=p).fit(X, y)


def fit_decision_tree(X, y, min_samples_split: int = 2, min_samples_leaf: int = 1, max_depth=None) -> DecisionTreeRegressor:
    return DecisionTreeRegressor(min_samples_split, min_samples_leaf, max_depth).fit(X, y)


def fit_random_forest(X, y, n_estimators: int = 100, bootstrap: bool = True, seed: int = 0) -> RandomForestRegressor:
    return RandomForestRegressor(n_estimators=n_estimators, bootstrap=bootstrap, seed=seed).fit(X, y)


def fit_svr(X, y, C: float = 1.0, epsilon: float = 0.1, tol: float = 1e-3, gamma="scale") -> SVR:
    return SVR(C=C, epsilon=epsilon, tol=tol, gamma=gamma).fit(X, y)


def fit(kind: str, X, y, seed: int = 0) -> Regressor:
    """Fit a model by CLI token with its default hyperparameters."""
    if kind == "lr":
        return fit_linear_regression(X, y)
    if kind == "rf":
        return fit_random_forest(X, y, seed=seed)
    if kind == "svm":
        return fit_svr(X, y)
    if kind == "knn":
        return fit_knn(X, y)
    if kind == "dt":
        return fit_decision_tree(X, y)
    raise ArgumentError(f"unknown classical model {kind!r}; expected one of {', '.join(NAMES)}")


def predict(model: Regressor, X):
    return model.predict(X)


__all__ = [
    "NAMES",
    "SVR",
    "DecisionTreeRegressor",
    "KNeighborsRegressor",
    "LinearRegression",
    "RandomForestRegressor",
    "Regressor",
    "fit",
    "fit_decision_tree",
    "fit_knn",
    "fit_linear_regression",
    "fit_random_forest",
    "fit_svr",
    "predict",
]
