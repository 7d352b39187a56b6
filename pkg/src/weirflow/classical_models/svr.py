"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual is written over 2n multipliers ``a = [alpha, alpha*]``::

    min  0.5 a'Qa + p'a    s.t.  s'a = 0,  0 <= a <= C

with ``s = [+1]*n + [-1]*n``, ``p = [eps - y, eps + y]`` and
``Q_ij = s_i s_j K(x_i, x_j)``. It is solved by sequential minimal
optimization with second-order working-set selection.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ConvergenceError
from .base import Regressor, as_xy

MAX_ITER = 100_000
TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def scale_gamma(X: np.ndarray) -> float:
    """1 / (n_features * variance of all entries); 1.0 for a constant matrix."""
    var = X.var()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, epsilon: float, tol: float, max_iter: int = MAX_ITER):
    """SMO on the 2n-variable dual. Returns ``(a, gradient, iterations)``."""
    n = y.shape[0]
    s = np.concatenate([np.ones(n), -np.ones(n)])
    Q = np.block([[K, -K], [-K, K]])
    diag = np.diag(Q)
    a = np.zeros(2 * n)
    G = np.concatenate([epsilon - y, epsilon + y])

    for it in range(max_iter):
        up = ((s > 0) & (a < C)) | ((s < 0) & (a > 0))
        low = ((s > 0) & (a > 0)) | ((s < 0) & (a < C))
        score = -s * G
        if not up.any() or not low.any():
            return a, G, it
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        m = score[i]
        M = score[low].min()
        if m - M < tol:
            return a, G, it

        cand = low & (score < m)
        b_it = m - score[cand]
        a_it = diag[i] + diag[cand] - 2.0 * s[i] * s[cand] * Q[i, cand]
        a_it = np.where(a_it > 0, a_it, TAU)
        j = int(np.flatnonzero(cand)[np.argmin(-(b_it * b_it) / a_it)])

        quad = diag[i] + diag[j] - 2.0 * s[i] * s[j] * Q[i, j]
        quad = quad if quad > 0 else TAU
        step = (score[i] - score[j]) / quad
        step = min(step, C - a[i] if s[i] > 0 else a[i], a[j] if s[j] > 0 else C - a[j])
        new_i = min(max(a[i] + s[i] * step, 0.0), C)
        new_j = min(max(a[j] - s[j] * step, 0.0), C)
        di, dj = new_i - a[i], new_j - a[j]
        a[i], a[j] = new_i, new_j
        G += Q[:, i] * di + Q[:, j] * dj
    raise ConvergenceError(f"SVR solver did not reach tol={tol} within {max_iter} iterations")


def _intercept(a, G, C):
    n2 = a.shape[0]
    s = np.concatenate([np.ones(n2 // 2), -np.ones(n2 // 2)])
    yG = s * G
    at_upper = a >= C
    at_lower = a <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (at_upper & (s < 0)) | (at_lower & (s > 0))
        lb_mask = (at_upper & (s > 0)) | (at_lower & (s < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    return -float(rho)


def dual_objective(a: np.ndarray, K: np.ndarray, y: np.ndarray, epsilon: float) -> float:
    n = y.shape[0]
    beta = a[:n] - a[n:]
    return float(0.5 * beta @ K @ beta + epsilon * a.sum() - y @ beta)


class SVR(Regressor):
    """RBF epsilon-SVR. ``gamma="scale"`` uses :func:`scale_gamma` on the training matrix.

    Polynomial-kernel settings (degree, coef0) and solver cache/shrinking
    knobs have no effect under this kernel and solver, so they are not taken.
    """

    kind = "svm"

    def __init__(self, C: float = 1.0, epsilon: float = 0.1, tol: float = 1e-3, gamma="scale", max_iter: int = MAX_ITER):
        if not C > 0 or not epsilon >= 0 or not tol > 0:
            raise ArgumentError("need C > 0, epsilon >= 0, tol > 0")
        self.C = C
        self.epsilon = epsilon
        self.tol = tol
        self.gamma = gamma
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = as_xy(X, y)
        n = X.shape[0]
        if n < 1:
            raise ArgumentError("cannot fit SVR on zero rows")
        self.gamma_ = scale_gamma(X) if self.gamma == "scale" else float(self.gamma)
        K = rbf_kernel(X, X, self.gamma_)
        a, G, self.n_iter_ = solve_dual(K, y, self.C, self.epsilon, self.tol, self.max_iter)
        self.alpha_, self.alpha_star_ = a[:n].copy(), a[n:].copy()
        self.intercept_ = _intercept(a, G, self.C)
        self.objective_ = dual_objective(a, K, y, self.epsilon)
        beta = self.alpha_ - self.alpha_star_
        support = np.flatnonzero(beta != 0)
        self.support_ = support
        self.dual_coef_ = beta[support]
        self.support_vectors_ = X[support].copy()
        self.n_features_ = X.shape[1]
        return self

    def _predict(self, X):
        if self.support_.size == 0:
            return np.full(X.shape[0], self.intercept_)
        return rbf_kernel(X, self.support_vectors_, self.gamma_) @ self.dual_coef_ + self.intercept_
