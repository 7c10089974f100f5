"""Random forests and gradient-boosted trees for binary labels."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ValidationError
from ._base import check_binary_xy, check_features, sample_weights, sigmoid
from .tree import build_tree, resolve_max_features

_MAX_SEED = np.iinfo(np.int32).max


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    """Bagged entropy trees with random feature subsets at each split.

    Each tree sees a same-size bootstrap resample, drawn as per-example
    multiplicity weights. Predicted probability is the mean over trees.
    """

    def __init__(self, n_estimators=100, max_depth=None, max_features="sqrt", bootstrap=True,
                 min_samples_leaf=1, class_weight=None, random_state=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.min_samples_leaf = min_samples_leaf
        self.class_weight = class_weight
        self.random_state = random_state

    def fit(self, X, y):
        if self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be positive, got {self.n_estimators}")
        X, y = check_binary_xy(X, y)
        base_w = sample_weights(y, self.class_weight)
        rng = check_random_state(self.random_state)
        n = len(y)
        max_features = resolve_max_features(self.max_features, X.shape[1])
        yf = y.astype(np.float64)
        self.estimators_ = []
        for _ in range(self.n_estimators):
            seed = rng.randint(_MAX_SEED)
            w = base_w
            if self.bootstrap:
                counts = np.bincount(rng.randint(0, n, n), minlength=n)
                w = base_w * counts
            self.estimators_.append(build_tree(
                X, yf, w, "entropy", self.max_depth, max_features,
                min_samples_leaf=self.min_samples_leaf, random_state=seed,
            ))
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "estimators_")
        X = check_features(self, X)
        p = np.mean([tree.predict(X) for tree in self.estimators_], axis=0)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)


def log_loss(y, p, weights):
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-np.sum(weights * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))) / weights.sum())


class GradientBoostingClassifier(ClassifierMixin, BaseEstimator):
    """Gradient boosting on the logistic loss.

    Starts from the log-odds of the (weighted) positive rate. Each round
    fits a squared-error regression tree to the residuals ``y - p`` (the
    negative gradient), sets every leaf to its one-step Newton value
    ``sum(w r) / sum(w p (1 - p))`` and adds it scaled by ``learning_rate``.
    """

    def __init__(self, n_estimators=100, learning_rate=0.1, max_depth=3, min_samples_leaf=1,
                 class_weight=None, random_state=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.class_weight = class_weight
        self.random_state = random_state

    def fit(self, X, y):
        if self.n_estimators < 0:
            raise ValidationError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        X, y = check_binary_xy(X, y)
        yf = y.astype(np.float64)
        w = sample_weights(y, self.class_weight)
        rng = check_random_state(self.random_state)
        rate = np.dot(w, yf) / w.sum()
        self.base_score_ = float(np.log(rate / (1.0 - rate)))
        F = np.full(len(y), self.base_score_)
        self.train_loss_ = [log_loss(yf, sigmoid(F), w)]
        self.estimators_ = []
        for _ in range(self.n_estimators):
            p = sigmoid(F)
            residual = yf - p
            tree = build_tree(X, residual, w, "squared_error", self.max_depth,
                              min_samples_leaf=self.min_samples_leaf, random_state=rng.randint(_MAX_SEED))
            leaves = tree.apply(X)
            num = np.bincount(leaves, weights=w * residual, minlength=tree.node_count)
            den = np.bincount(leaves, weights=w * p * (1.0 - p), minlength=tree.node_count)
            tree.value = self.learning_rate * num / np.maximum(den, 1e-12)
            F += tree.value[leaves]
            self.estimators_.append(tree)
            self.train_loss_.append(log_loss(yf, sigmoid(F), w))
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "estimators_")
        X = check_features(self, X)
        F = np.full(len(X), self.base_score_)
        for tree in self.estimators_:
            F += tree.predict(X)
        return F

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)
