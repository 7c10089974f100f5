"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual problem solved is

    min  a^T Q a / 2 - sum(a)   s.t.  sum(s_i a_i) = 0,  0 <= a_i <= C * c_i

with ``s_i`` in {-1, +1}, ``Q_ij = s_i s_j K(x_i, x_j)`` and ``c_i`` the
class weight of example ``i``. Each step optimizes the maximal-violating
pair chosen with second-order working-set selection.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import ConvergenceError, ValidationError
from ._base import check_binary_xy, check_features, sample_weights

_TAU = 1e-12


def squared_distances(X, Y):
    XX = np.einsum("ij,ij->i", X, X)[:, None]
    YY = np.einsum("ij,ij->i", Y, Y)[None, :]
    return np.maximum(XX + YY - 2.0 * X @ Y.T, 0.0)


def rbf_kernel(X, Y, gamma):
    """Gaussian kernel matrix ``exp(-gamma * ||x - y||^2)``."""
    return np.exp(-gamma * squared_distances(np.atleast_2d(X), np.atleast_2d(Y)))


def gaussian_kernel(x, y, gamma):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    return float(np.exp(-gamma * np.sum((x - y) ** 2)))


def gamma_from_sigma(sigma, reading="inverse_width"):
    """Kernel coefficient for a width parameter ``sigma``.

    ``"inverse_width"`` uses ``exp(-sigma ||x-y||^2)``; ``"gaussian"`` uses
    ``exp(-||x-y||^2 / (2 sigma^2))``.
    """
    if reading == "inverse_width":
        return float(sigma)
    if reading == "gaussian":
        return 1.0 / (2.0 * sigma ** 2)
    raise ValidationError(f"unknown kernel reading {reading!r}")


def _violating_sets(alpha, s, upper):
    up = ((s > 0) & (alpha < upper)) | ((s < 0) & (alpha > 0))
    low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < upper))
    return up, low


def kkt_gap(alpha, s, grad, upper):
    """``max_{I_up} -s G - min_{I_low} -s G``; zero at an exact optimum."""
    up, low = _violating_sets(alpha, s, upper)
    v = -s * grad
    if not up.any() or not low.any():
        return 0.0
    return float(v[up].max() - v[low].min())


def smo(K, s, upper, tol=1e-3, max_iter=None):
    """Solve the SVM dual for kernel matrix ``K``.

    Returns ``(alpha, rho, gradient, n_iter)``; the decision function is
    ``sum_i alpha_i s_i K(x_i, x) - rho``.
    """
    n = len(s)
    if max_iter is None:
        max_iter = max(10_000 * n, 100_000)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K).copy()
    for it in range(max_iter):
        up, low = _violating_sets(alpha, s, upper)
        v = -s * grad
        v_up = np.where(up, v, -np.inf)
        i = int(np.argmax(v_up))
        m_up = v_up[i]
        v_low = np.where(low, v, np.inf)
        if m_up - v_low.min() <= tol:
            break
        # second-order choice of j among I_low entries that violate with i
        b = m_up - v
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        Ki, Kj = K[i], K[j]
        Qij = s[i] * s[j] * Ki[j]
        # closed-form pair update, clipped to the box and the equality constraint
        old_i, old_j = alpha[i], alpha[j]
        if s[i] != s[j]:
            delta = (-grad[i] - grad[j]) / max(diag[i] + diag[j] + 2.0 * Qij, _TAU)
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > upper[i] - upper[j]:
                if ai > upper[i]:
                    ai, aj = upper[i], upper[i] - diff
            elif aj > upper[j]:
                aj, ai = upper[j], upper[j] + diff
        else:
            delta = (grad[i] - grad[j]) / max(diag[i] + diag[j] - 2.0 * Qij, _TAU)
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > upper[i]:
                if ai > upper[i]:
                    ai, aj = upper[i], total - upper[i]
            elif aj < 0:
                aj, ai = 0.0, total
            if total > upper[j]:
                if aj > upper[j]:
                    aj, ai = upper[j], total - upper[j]
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += (s * s[i] * (ai - old_i)) * Ki + (s * s[j] * (aj - old_j)) * Kj
    else:
        gap = kkt_gap(alpha, s, grad, upper)
        raise ConvergenceError(f"SMO hit {max_iter} iterations with KKT gap {gap:.3e}", residual=gap)
    return alpha, _rho(alpha, s, grad, upper), grad, it


def _rho(alpha, s, grad, upper):
    sg = s * grad
    free = (alpha > 0) & (alpha < upper)
    if free.any():
        return float(sg[free].mean())
    # bounded-only solution: midpoint of the feasible interval for rho
    at_upper = alpha >= upper
    ub_mask = (at_upper & (s < 0)) | (~at_upper & (s > 0))
    lb_mask = (at_upper & (s > 0)) | (~at_upper & (s < 0))
    ub = np.min(sg[ub_mask], initial=np.inf)
    lb = np.max(sg[lb_mask], initial=-np.inf)
    return float((ub + lb) / 2.0)


class SVC(ClassifierMixin, BaseEstimator):
    """Gaussian-kernel support vector classifier.

    Parameters
    ----------
    C : float
        Box constraint; example ``i`` is bounded by ``C * class_weight[y_i]``.
    gamma : float or "auto"
        Kernel coefficient; ``"auto"`` is ``1 / n_features``.
    class_weight : None, "balanced" or {0: w0, 1: w1}
    tol : float
        Stopping tolerance on the maximal KKT violation.
    max_iter : int or None
        Pair-update cap; ``None`` means ``max(10_000 * n, 100_000)``.
    """

    def __init__(self, C=100.0, gamma="auto", class_weight="balanced", tol=1e-3, max_iter=None):
        self.C = C
        self.gamma = gamma
        self.class_weight = class_weight
        self.tol = tol
        self.max_iter = max_iter

    def _gamma(self, n_features):
        gamma = 1.0 / n_features if self.gamma == "auto" else float(self.gamma)
        if not gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        return gamma

    def fit(self, X, y):
        if not self.C > 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        X, y = check_binary_xy(X, y)
        gamma = self._gamma(X.shape[1])
        s = np.where(y == 1, 1.0, -1.0)
        upper = self.C * sample_weights(y, self.class_weight)
        K = rbf_kernel(X, X, gamma)
        alpha, rho, grad, n_iter = smo(K, s, upper, self.tol, self.max_iter)
        sv = alpha > 0
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.gamma_ = gamma
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * s[sv]
        self.intercept_ = -rho
        self.n_iter_ = n_iter
        self.kkt_gap_ = kkt_gap(alpha, s, grad, upper)
        self.alpha_ = alpha
        self.upper_ = upper
        return self

    def decision_function(self, X):
        check_is_fitted(self, "dual_coef_")
        X = check_features(self, X)
        if len(self.dual_coef_) == 0:
            return np.full(len(X), self.intercept_)
        return rbf_kernel(X, self.support_vectors_, self.gamma_) @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)


def kkt_violations(model, X, y):
    """Per-example violation of the soft-margin optimality conditions."""
    X = check_array(X, dtype=np.float64)
    s = np.where(np.asarray(y) == 1, 1.0, -1.0)
    margin = s * model.decision_function(X)
    alpha, upper = model.alpha_, model.upper_
    at_zero = alpha <= 0
    at_upper = alpha >= upper
    free = ~at_zero & ~at_upper
    viol = np.zeros(len(s))
    viol[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    viol[at_upper] = np.maximum(0.0, margin[at_upper] - 1.0)
    viol[free] = np.abs(margin[free] - 1.0)
    return viol
