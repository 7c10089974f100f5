import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from ..exceptions import ValidationError


def balanced_class_weights(labels):
    """Per-class weights ``n / (2 * n_c)`` as ``(w_negative, w_positive)``."""
    labels = np.asarray(labels)
    n = len(labels)
    n_pos = int(np.count_nonzero(labels == 1))
    n_neg = int(np.count_nonzero(labels == 0))
    if n_pos + n_neg != n:
        raise ValidationError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("balanced class weights need both classes present")
    return n / (2.0 * n_neg), n / (2.0 * n_pos)


def sample_weights(y, class_weight):
    """Expand a ``class_weight`` setting into one weight per example.

    ``class_weight`` is ``None`` (all ones), ``"balanced"``, or a mapping
    ``{0: w0, 1: w1}``.
    """
    if class_weight is None:
        return np.ones(len(y))
    if isinstance(class_weight, str):
        if class_weight != "balanced":
            raise ValidationError(f"unknown class_weight {class_weight!r}")
        w = balanced_class_weights(y)
    else:
        w = (float(class_weight[0]), float(class_weight[1]))
        if min(w) <= 0:
            raise ValidationError("class weights must be positive")
    return np.where(y == 1, w[1], w[0])


def check_binary_xy(X, y):
    X, y = check_X_y(X, y, dtype=np.float64)
    labels = np.unique(y)
    if not np.all(np.isin(labels, (0, 1))):
        raise ValidationError(f"labels must be 0 or 1, got {labels.tolist()}")
    if len(labels) < 2:
        raise ValidationError("training data must contain both classes")
    return X, y.astype(np.int64)


def check_features(estimator, X):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != estimator.n_features_in_:
        raise ValidationError(f"expected {estimator.n_features_in_} features, got {X.shape[1]}")
    return X


def sigmoid(z):
    # numerically stable for large |z|
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
