"""Greedy binary decision trees with weighted entropy or squared-error splits."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ._base import check_binary_xy, check_features, sample_weights

LEAF = -1


def entropy(p):
    """Binary entropy in bits of positive-class probability ``p`` (array-friendly)."""
    p = np.asarray(p, dtype=np.float64)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


@dataclass
class Tree:
    """Flat array representation; node 0 is the root.

    Internal nodes send ``x[feature] <= threshold`` to ``left``.
    Leaves have ``feature == -1`` and carry ``value``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def node_count(self):
        return len(self.feature)

    def apply(self, X):
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] != LEAF
        return node

    def predict(self, X):
        return self.value[self.apply(X)]


def _best_split(Xn, yn, wn, features, criterion, min_samples_leaf):
    """Best (gain, feature, threshold) over ``features`` or None if no valid split."""
    n = len(yn)
    Xf = Xn[:, features]
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = np.take_along_axis(Xf, order, axis=0)
    ws = wn[order]
    wys = (wn * yn)[order]
    wl = np.cumsum(ws, axis=0)[:-1]
    wyl = np.cumsum(wys, axis=0)[:-1]
    W, WY = ws.sum(axis=0), wys.sum(axis=0)
    wr, wyr = W - wl, WY - wyl

    if criterion == "entropy":
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = np.clip(wyl / wl, 0.0, 1.0)
            pr = np.clip(wyr / wr, 0.0, 1.0)
        children = (wl * entropy(pl) + wr * entropy(pr)) / W
        parent = entropy(np.clip(WY / W, 0.0, 1.0))
    else:
        wyys = (wn * yn * yn)[order]
        wyyl = np.cumsum(wyys, axis=0)[:-1]
        WYY = wyys.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            sse_l = wyyl - wyl ** 2 / wl
            sse_r = (WYY - wyyl) - wyr ** 2 / wr
        children = (sse_l + sse_r) / W
        parent = (WYY - WY ** 2 / W) / W
    gain = parent - children

    pos = np.arange(1, n)[:, None]
    valid = (xs[1:] > xs[:-1]) & (pos >= min_samples_leaf) & (n - pos >= min_samples_leaf)
    valid &= (wl > 0) & (wr > 0)
    gain = np.where(valid, gain, -np.inf)
    if not np.isfinite(gain).any():
        return None
    # ties prefer the earlier candidate feature, then the smaller threshold
    flat = int(np.argmax(gain.T))
    f, i = divmod(flat, n - 1)
    lo, hi = xs[i, f], xs[i + 1, f]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return float(gain[i, f]), int(features[f]), float(thr)


def build_tree(X, y, weights, criterion="entropy", max_depth=None, max_features=None,
               min_samples_split=2, min_samples_leaf=1, random_state=None):
    """Grow a tree depth-first; leaf values are weighted means of ``y``.

    ``max_features=None`` scans every feature in index order, which makes the
    tree independent of ``random_state``.
    """
    rng = check_random_state(random_state)
    n_features = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        w = weights[idx]
        value.append(float(np.dot(w, y[idx]) / w.sum()) if w.sum() > 0 else 0.0)
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if len(idx) < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        yn, wn = y[idx], weights[idx]
        live = yn[wn > 0]
        if len(live) == 0 or live.min() == live.max():
            continue
        Xn = X[idx]
        if max_features is None or max_features >= n_features:
            chunks = [np.arange(n_features)]
        else:
            perm = rng.permutation(n_features)
            chunks = [perm[k:k + max_features] for k in range(0, n_features, max_features)]
        best = None
        for features in chunks:
            best = _best_split(Xn, yn, wn, features, criterion, min_samples_leaf)
            if best is not None:
                break
        if best is None:
            continue
        _, f, thr = best
        mask = Xn[:, f] <= thr
        lnode, rnode = new_node(idx[mask]), new_node(idx[~mask])
        feature[node], threshold[node] = f, thr
        left[node], right[node] = lnode, rnode
        stack.append((rnode, idx[~mask], depth + 1))
        stack.append((lnode, idx[mask], depth + 1))

    return Tree(np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(value))


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if isinstance(max_features, float):
        return max(1, int(max_features * n_features))
    return int(max_features)


class DecisionTreeClassifier(ClassifierMixin, BaseEstimator):
    """Binary decision tree grown on weighted information gain (entropy, bits).

    Leaves hold the weighted fraction of positive examples, which is what
    ``predict_proba`` returns; ``predict`` thresholds it at 0.5.
    """

    def __init__(self, max_depth=None, max_features=None, min_samples_split=2, min_samples_leaf=1,
                 class_weight=None, random_state=None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.class_weight = class_weight
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y = check_binary_xy(X, y)
        w = sample_weights(y, self.class_weight)
        if sample_weight is not None:
            w = w * np.asarray(sample_weight, dtype=np.float64)
        self.tree_ = build_tree(
            X, y.astype(np.float64), w, "entropy", self.max_depth,
            resolve_max_features(self.max_features, X.shape[1]),
            self.min_samples_split, self.min_samples_leaf, self.random_state,
        )
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "tree_")
        p = self.tree_.predict(check_features(self, X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
