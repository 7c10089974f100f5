"""Versioned JSON model files holding a semantic space and an optional classifier.

Arrays are stored as base64 little-endian float64/int64 bytes so a save/load
round trip is bit-exact.
"""

import base64
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .classifiers import (
    SVC,
    GradientBoostingClassifier,
    LogisticRegression,
    RandomForestClassifier,
)
from .classifiers.tree import Tree
from .corpus import Vocabulary
from .exceptions import ModelFileError
from .lsa import SemanticSpace

FORMAT = "sarclab-model"
VERSION = 1

TOKENIZER_FLAGS = {"lowercase": True, "punctuation_runs": "maximal", "alphanumeric": "L*,Nd"}

_CLASSIFIER_TYPES = {
    "logistic": LogisticRegression,
    "svm": SVC,
    "random_forest": RandomForestClassifier,
    "gradient_boosting": GradientBoostingClassifier,
}


def _enc(a, dtype="<f8"):
    a = np.ascontiguousarray(a, dtype=dtype)
    return {"dtype": dtype, "shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _dec(obj):
    a = np.frombuffer(base64.b64decode(obj["data"], validate=True), dtype=obj["dtype"])
    return a.reshape(obj["shape"]).astype(a.dtype.newbyteorder("="))


def _tree_state(tree):
    return {
        "feature": _enc(tree.feature, "<i8"),
        "threshold": _enc(tree.threshold),
        "left": _enc(tree.left, "<i8"),
        "right": _enc(tree.right, "<i8"),
        "value": _enc(tree.value),
    }


def _tree_from_state(state):
    return Tree(*(_dec(state[k]) for k in ("feature", "threshold", "left", "right", "value")))


def space_to_dict(space: SemanticSpace) -> dict:
    return {
        "variant": space.variant,
        "tokens": list(space.vocabulary.tokens),
        "U": _enc(space.U),
        "sigma": _enc(space.sigma),
        "idf": None if space.idf is None else _enc(space.idf),
        "grand_total": space.grand_total,
        "tokenizer": TOKENIZER_FLAGS,
    }


def space_from_dict(d: dict) -> SemanticSpace:
    if d.get("tokenizer") != TOKENIZER_FLAGS:
        raise ValueError(f"tokenizer flags {d.get('tokenizer')!r} do not match this version")
    idf = None if d["idf"] is None else _dec(d["idf"])
    total = None if d["grand_total"] is None else float(d["grand_total"])
    return SemanticSpace(d["variant"], Vocabulary(d["tokens"]), _dec(d["U"]), _dec(d["sigma"]), idf, total)


def _json_params(params):
    cw = params.get("class_weight")
    if isinstance(cw, dict):
        params = {**params, "class_weight": {str(k): v for k, v in cw.items()}}
    return params


def classifier_to_dict(name, model) -> dict:
    if name not in _CLASSIFIER_TYPES:
        raise ValueError(f"unknown classifier {name!r}")
    state = {"n_features_in": int(model.n_features_in_)}
    if name == "logistic":
        state["beta"] = _enc(model.beta_)
    elif name == "svm":
        state.update(support_vectors=_enc(model.support_vectors_), dual_coef=_enc(model.dual_coef_),
                     intercept=float(model.intercept_), gamma=float(model.gamma_))
    else:
        state["trees"] = [_tree_state(t) for t in model.estimators_]
        if name == "gradient_boosting":
            state["base_score"] = float(model.base_score_)
    return {"name": name, "params": _json_params(model.get_params()), "state": state}


def classifier_from_dict(d: dict):
    name = d["name"]
    params = dict(d["params"])
    if isinstance(params.get("class_weight"), dict):
        params["class_weight"] = {int(k): v for k, v in params["class_weight"].items()}
    model = _CLASSIFIER_TYPES[name](**params)
    state = d["state"]
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = int(state["n_features_in"])
    if name == "logistic":
        model.beta_ = _dec(state["beta"])
        model.coef_ = model.beta_[:-1].copy()
        model.intercept_ = float(model.beta_[-1])
    elif name == "svm":
        model.support_vectors_ = _dec(state["support_vectors"])
        model.dual_coef_ = _dec(state["dual_coef"])
        model.intercept_ = float(state["intercept"])
        model.gamma_ = float(state["gamma"])
    else:
        model.estimators_ = [_tree_from_state(t) for t in state["trees"]]
        if name == "gradient_boosting":
            model.base_score_ = float(state["base_score"])
    return name, model


def save_model(path, space, classifier=None, classifier_name=None, use_star=False, metadata=None):
    """Write a model file atomically (temporary file + rename)."""
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "metadata": metadata or {},
        "use_star": bool(use_star),
        "space": space_to_dict(space),
        "classifier": None if classifier is None else classifier_to_dict(classifier_name, classifier),
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


class LoadedModel:
    def __init__(self, space, classifier_name, classifier, use_star, metadata):
        self.space = space
        self.classifier_name = classifier_name
        self.classifier = classifier
        self.use_star = use_star
        self.metadata = metadata


def load_model(path) -> LoadedModel:
    """Read a model file; any defect raises :class:`ModelFileError` naming its section."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"not valid JSON ({exc.msg} at line {exc.lineno})", section="header") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFileError(f"not a {FORMAT} file", section="header")
    if doc.get("version") != VERSION:
        raise ModelFileError(f"unsupported version {doc.get('version')!r}; expected {VERSION}", section="header")
    try:
        space = space_from_dict(doc["space"])
    except Exception as exc:
        raise ModelFileError(f"{type(exc).__name__}: {exc}", section="space") from None
    name = model = None
    if doc.get("classifier") is not None:
        try:
            name, model = classifier_from_dict(doc["classifier"])
            if model.n_features_in_ != space.rank + bool(doc.get("use_star")):
                raise ValueError(f"classifier expects {model.n_features_in_} features, space has rank {space.rank}")
        except Exception as exc:
            raise ModelFileError(f"{type(exc).__name__}: {exc}", section="classifier") from None
    return LoadedModel(space, name, model, bool(doc.get("use_star")), doc.get("metadata", {}))
