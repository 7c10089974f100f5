"""L1/L2-regularized logistic regression.

The objective, with ``s_i = 2 y_i - 1`` and ``z_i = x_i . w + b``, is

    C * sum_i c_i * log(1 + exp(-s_i z_i)) + R(w)

where ``c_i`` are per-example class weights and ``R`` is ``||w||_1`` (L1) or
``||w||^2 / 2`` (L2). The intercept ``b`` is not penalized.
"""

import warnings

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConvergenceError, SolverWarning, ValidationError
from ._base import check_binary_xy, check_features, sample_weights, sigmoid

_DEFAULT_TOL = {"l1": 1e-5, "l2": 1e-6}


def _margins(beta, X):
    return X @ beta[:-1] + beta[-1]


def smooth_loss(beta, X, y, weights, C):
    """Weighted logistic loss scaled by ``C`` (no penalty)."""
    s = 2.0 * y - 1.0
    return C * float(np.sum(weights * np.logaddexp(0.0, -s * _margins(beta, X))))


def smooth_gradient(beta, X, y, weights, C):
    r = C * weights * (sigmoid(_margins(beta, X)) - y)
    return np.append(X.T @ r, r.sum())


def _hessian_product(beta, X, weights, C, v):
    p = sigmoid(_margins(beta, X))
    d = C * weights * p * (1.0 - p)
    u = d * (X @ v[:-1] + v[-1])
    return np.append(X.T @ u, u.sum())


def objective(beta, X, y, weights, C, penalty):
    w = beta[:-1]
    reg = np.abs(w).sum() if penalty == "l1" else 0.5 * w @ w
    return smooth_loss(beta, X, y, weights, C) + reg


def gradient(beta, X, y, weights, C, penalty):
    """Gradient of :func:`objective`; for L1 the penalty contributes ``sign(w)``."""
    g = smooth_gradient(beta, X, y, weights, C)
    w = beta[:-1]
    g[:-1] += np.sign(w) if penalty == "l1" else w
    return g


def l1_optimality(beta, g_smooth):
    """Infinity norm of the minimum-norm subgradient of the L1 objective."""
    w, gw = beta[:-1], g_smooth[:-1]
    sub = np.where(w != 0, gw + np.sign(w), np.maximum(np.abs(gw) - 1.0, 0.0))
    return float(max(np.abs(sub).max(initial=0.0), abs(g_smooth[-1])))


def predict_proba_from_beta(beta, X):
    return sigmoid(_margins(np.asarray(beta, dtype=np.float64), np.atleast_2d(X)))


class LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression with L1 or L2 penalty.

    L2 is solved with a trust-region Newton-CG method. L1 splits the
    weights into non-negative positive and negative parts, solves the
    bound-constrained problem with L-BFGS-B and finishes with
    orthant-restricted Newton steps.

    Parameters
    ----------
    penalty : {"l1", "l2"}
    C : float
        Inverse regularization strength.
    class_weight : None, "balanced" or {0: w0, 1: w1}
    tol : float or None
        Gradient-norm (L2) or subgradient-optimality (L1) tolerance;
        ``None`` picks 1e-6 for L2 and 1e-5 for L1.
    max_iter : int
    """

    def __init__(self, penalty="l1", C=10.0, class_weight="balanced", tol=None, max_iter=1000):
        self.penalty = penalty
        self.C = C
        self.class_weight = class_weight
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        if self.penalty not in ("l1", "l2"):
            raise ValidationError(f"penalty must be 'l1' or 'l2', got {self.penalty!r}")
        if not self.C > 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        X, y = check_binary_xy(X, y)
        weights = sample_weights(y, self.class_weight)
        tol = _DEFAULT_TOL[self.penalty] if self.tol is None else self.tol
        args = (X, y.astype(np.float64), weights, float(self.C))
        self.objective_history_ = []
        beta0 = np.zeros(X.shape[1] + 1)
        if self.penalty == "l2":
            beta, self.n_iter_, self.optimality_ = self._fit_l2(beta0, args, tol)
        else:
            beta, self.n_iter_, self.optimality_ = self._fit_l1(beta0, args, tol)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.beta_ = beta
        self.coef_ = beta[:-1].copy()
        self.intercept_ = float(beta[-1])
        return self

    def _record(self, beta, args):
        self.objective_history_.append(objective(beta, *args, self.penalty))

    def _fit_l2(self, beta0, args, tol):
        fun = lambda b: objective(b, *args, "l2")
        jac = lambda b: gradient(b, *args, "l2")
        X, _, weights, C = args

        def hessp(b, v):
            out = _hessian_product(b, X, weights, C, v)
            out[:-1] += v[:-1]
            return out

        self._record(beta0, args)
        res = minimize(fun, beta0, jac=jac, hessp=hessp, method="trust-ncg",
                       options={"gtol": tol, "maxiter": self.max_iter},
                       callback=lambda b: self._record(b, args))
        beta, gnorm, extra = self._newton_polish(res.x, args, tol)
        if gnorm > tol:
            raise ConvergenceError(f"L2 logistic regression did not converge: gradient norm {gnorm:.3e}",
                                   residual=gnorm)
        return beta, int(res.nit) + extra, gnorm

    def _newton_polish(self, beta, args, tol, max_steps=20):
        # trust-ncg can stop on precision loss just above tol; exact Newton steps finish the job
        X, _, weights, C = args
        fval = objective(beta, *args, "l2")
        for step in range(max_steps):
            g = gradient(beta, *args, "l2")
            gnorm = float(np.linalg.norm(g))
            if gnorm <= tol:
                return beta, gnorm, step
            p = sigmoid(_margins(beta, X))
            D = C * weights * p * (1.0 - p)
            Xa = np.column_stack([X, np.ones(len(X))])
            H = Xa.T @ (D[:, None] * Xa)
            H[np.arange(X.shape[1]), np.arange(X.shape[1])] += 1.0
            direction = -np.linalg.solve(H + 1e-12 * np.eye(len(beta)), g)
            t = 1.0
            while t > 1e-12:
                cand = beta + t * direction
                fnew = objective(cand, *args, "l2")
                if fnew <= fval:
                    break
                t *= 0.5
            else:
                return beta, gnorm, step
            beta, fval = cand, fnew
            self.objective_history_.append(fval)
        return beta, float(np.linalg.norm(gradient(beta, *args, "l2"))), max_steps

    def _fit_l1(self, beta0, args, tol):
        d = len(beta0) - 1

        def split_fun(z):
            beta = np.append(z[:d] - z[d:2 * d], z[-1])
            g = smooth_gradient(beta, *args)
            f = smooth_loss(beta, *args) + z[:2 * d].sum()
            return f, np.concatenate([g[:-1] + 1.0, 1.0 - g[:-1], g[-1:]])

        def to_beta(z):
            return np.append(z[:d] - z[d:2 * d], z[-1])

        self._record(beta0, args)
        bounds = [(0.0, None)] * (2 * d) + [(None, None)]
        res = minimize(split_fun, np.zeros(2 * d + 1), jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": self.max_iter, "ftol": 1e-15, "gtol": tol / 10.0, "maxcor": 20},
                       callback=lambda z: self._record(to_beta(z), args))
        beta = to_beta(res.x)
        n_iter = int(res.nit)
        beta, opt, polish_iter = self._orthant_newton(beta, args, tol, min(50, max(self.max_iter - n_iter, 0)))
        n_iter += polish_iter
        if opt > tol:
            if n_iter >= self.max_iter:
                raise ConvergenceError(f"L1 logistic regression hit {self.max_iter} iterations: "
                                       f"subgradient optimality {opt:.3e}", residual=opt)
            warnings.warn(f"L1 logistic regression stopped at optimality {opt:.3e} (tol {tol:.0e}) "
                          "on a line-search precision limit", SolverWarning, stacklevel=3)
        return beta, n_iter, opt

    def _orthant_newton(self, beta, args, tol, max_steps=50):
        """Newton steps on the non-zero coordinates, keeping every sign fixed."""
        X, y, weights, C = args
        fval = objective(beta, *args, "l1")
        for step in range(max_steps):
            g = smooth_gradient(beta, *args)
            opt = l1_optimality(beta, g)
            if opt <= tol:
                return beta, opt, step
            w = beta[:-1]
            # orthant: current sign, or the descent side for zero weights that violate optimality
            orient = np.sign(w)
            enter = (w == 0) & (np.abs(g[:-1]) > 1.0)
            orient[enter] = -np.sign(g[:-1][enter])
            free = np.append(orient != 0, True)
            gf = (g + np.append(orient, 0.0))[free]
            p = sigmoid(_margins(beta, X))
            D = C * weights * p * (1.0 - p)
            Xf = np.column_stack([X, np.ones(len(X))])[:, free]
            H = Xf.T @ (D[:, None] * Xf) + 1e-10 * np.eye(Xf.shape[1])
            try:
                direction = -np.linalg.solve(H, gf)
            except np.linalg.LinAlgError:
                return beta, opt, step
            t = 1.0
            while t > 1e-12:
                cand = beta.copy()
                cand[free] += t * direction
                # project onto the orthant: coordinates that change sign are zeroed
                cw = cand[:-1]
                cw[(orient != 0) & (np.sign(cw) != orient)] = 0.0
                fnew = objective(cand, *args, "l1")
                if fnew < fval:
                    break
                t *= 0.5
            else:
                return beta, opt, step
            beta, fval = cand, fnew
            self.objective_history_.append(fval)
        g = smooth_gradient(beta, *args)
        return beta, l1_optimality(beta, g), max_steps

    def decision_function(self, X):
        check_is_fitted(self, "beta_")
        return _margins(self.beta_, check_features(self, X))

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        # p >= 0.5 exactly when the margin is >= 0, so ties go to class 1
        return (self.decision_function(X) >= 0).astype(np.int64)
