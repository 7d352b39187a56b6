"""CART regression tree and bagged forest."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from .base import Regressor, as_xy

# Candidate splits whose child SSE is within this fraction of the node SSE of
# the best one are ties; the lowest feature, then lowest threshold, wins.
TIE_RTOL = 1e-10


def best_split(X: np.ndarray, y: np.ndarray, min_samples_leaf: int = 1):
    """Best MSE split of one node as ``(feature, threshold, child_sse)``, or None.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns None when no admissible split lowers the node SSE.
    """
    n, d = X.shape
    if n < 2:
        return None
    yc = y - y.sum() / n
    node_sse = float(yc @ yc)
    order = np.argsort(X, axis=0, kind="stable")
    xs = X[order, np.arange(d)]
    ys = yc[order]
    cs = np.cumsum(ys, axis=0)
    cs2 = np.cumsum(ys * ys, axis=0)
    n_left = np.arange(1.0, n)[:, None]
    n_right = n - n_left
    s_left, s2_left = cs[:-1], cs2[:-1]
    s_right, s2_right = cs[-1] - s_left, cs2[-1] - s2_left
    child = (s2_left - s_left * s_left / n_left) + (s2_right - s_right * s_right / n_right)
    valid = xs[1:] > xs[:-1]
    if min_samples_leaf > 1:
        valid &= (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    # feature-major so that flat order is (feature, threshold) ascending
    child = np.where(valid, child, np.inf).T.ravel()
    tol = TIE_RTOL * node_sse
    best = child.min()
    if not best < node_sse - tol:  # also catches "no admissible split" (inf)
        return None
    flat = int(np.flatnonzero(child <= best + tol)[0])
    feature, pos = divmod(flat, n - 1)
    threshold = 0.5 * (xs[pos, feature] + xs[pos + 1, feature])
    return feature, float(threshold), float(child[flat])


class DecisionTreeRegressor(Regressor):
    """Greedy best-split tree; rows with ``x[feature] <= threshold`` go left."""

    kind = "dt"

    def __init__(self, min_samples_split: int = 2, min_samples_leaf: int = 1, max_depth: int | None = None):
        if min_samples_split < 2 or min_samples_leaf < 1:
            raise ArgumentError("need min_samples_split >= 2 and min_samples_leaf >= 1")
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth

    def fit(self, X, y):
        X, y = as_xy(X, y)
        if X.shape[0] < 1:
            raise ArgumentError("cannot fit a tree on zero rows")
        self.feature_: list[int] = []
        self.threshold_: list[float] = []
        self.left_: list[int] = []
        self.right_: list[int] = []
        self.value_: list[float] = []
        self.n_features_ = X.shape[1]

        stack = [(self._new_node(y), np.arange(X.shape[0]), 0)]
        while stack:
            node, rows, depth = stack.pop()
            yn = y[rows]
            if (
                rows.size < self.min_samples_split
                or yn.max() == yn.min()
                or (self.max_depth is not None and depth >= self.max_depth)
            ):
                continue
            split = best_split(X[rows], yn, self.min_samples_leaf)
            if split is None:
                continue
            feature, threshold, _ = split
            go_left = X[rows, feature] <= threshold
            left_rows, right_rows = rows[go_left], rows[~go_left]
            self.feature_[node] = feature
            self.threshold_[node] = threshold
            self.left_[node] = self._new_node(y[left_rows])
            self.right_[node] = self._new_node(y[right_rows])
            stack.append((self.right_[node], right_rows, depth + 1))
            stack.append((self.left_[node], left_rows, depth + 1))

        self.feature_ = np.array(self.feature_)
        self.threshold_ = np.array(self.threshold_)
        self.left_ = np.array(self.left_)
        self.right_ = np.array(self.right_)
        self.value_ = np.array(self.value_)
        return self

    def _new_node(self, y_node) -> int:
        self.feature_.append(-1)
        self.threshold_.append(np.nan)
        self.left_.append(-1)
        self.right_.append(-1)
        self.value_.append(float(y_node.sum()) / y_node.size)
        return len(self.value_) - 1

    @property
    def node_count(self) -> int:
        return len(self.value_)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row."""
        X = as_xy(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            inner = self.feature_[node] >= 0
            if not inner.any():
                return node
            r, nd = rows[inner], node[inner]
            go_left = X[r, self.feature_[nd]] <= self.threshold_[nd]
            node[inner] = np.where(go_left, self.left_[nd], self.right_[nd])

    def _predict(self, X):
        return self.value_[self.apply(X)]


class RandomForestRegressor(Regressor):
    """Bootstrap-aggregated trees; every split considers all features.

    Tree ``t`` draws its bootstrap rows from ``default_rng([seed, t])``, so a
    forest does not depend on the order its trees are fitted in.
    """

    kind = "rf"

    def __init__(self, n_estimators: int = 100, bootstrap: bool = True, seed: int = 0, **tree_params):
        if n_estimators < 1:
            raise ArgumentError("n_estimators must be >= 1")
        self.n_estimators = n_estimators
        self.bootstrap = bootstrap
        self.seed = seed
        self.tree_params = tree_params

    def fit(self, X, y):
        X, y = as_xy(X, y)
        n = X.shape[0]
        if n < 2:
            raise ArgumentError("random forest needs at least 2 rows")
        self.trees_ = []
        for t in range(self.n_estimators):
            if self.bootstrap:
                rows = np.random.default_rng([self.seed, t]).integers(0, n, n)
            else:
                rows = np.arange(n)
            self.trees_.append(DecisionTreeRegressor(**self.tree_params).fit(X[rows], y[rows]))
        self.n_features_ = X.shape[1]
        return self

    def tree_predictions(self, X) -> np.ndarray:
        """(n_estimators, rows) matrix of per-tree predictions."""
        X = as_xy(X)
        return np.array([tree.predict(X) for tree in self.trees_])

    def _predict(self, X):
        return self.tree_predictions(X).mean(axis=0)
