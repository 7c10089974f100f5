"""The four binary classifiers trained on LSA document vectors."""

from ..exceptions import ValidationError
from ._base import balanced_class_weights
from .ensemble import GradientBoostingClassifier, RandomForestClassifier
from .logistic import LogisticRegression
from .svm import SVC, gamma_from_sigma, gaussian_kernel, kkt_violations
from .tree import DecisionTreeClassifier, entropy

CLASSIFIERS = ("svm", "logistic", "random_forest", "gradient_boosting")

# values from the experimental setup: SVM C=100 with sigma = 1/rank, L1 logistic with C=10,
# balanced class weights for SVM and logistic regression only
DEFAULT_HYPERPARAMETERS = {
    "svm": {"C": 100.0, "kernel_reading": "inverse_width", "class_weight": "balanced"},
    "logistic": {"penalty": "l1", "C": 10.0, "class_weight": "balanced"},
    "random_forest": {"n_estimators": 100, "max_depth": None, "max_features": "sqrt", "class_weight": None},
    "gradient_boosting": {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3, "class_weight": None},
}


def make_classifier(name, rank, seed=0, **overrides):
    """Build classifier ``name`` with the default hyperparameters for LSA rank ``rank``.

    For the SVM, the kernel width is ``sigma = 1 / rank``; ``kernel_reading``
    selects how sigma enters the kernel (see :func:`gamma_from_sigma`).
    """
    if name not in CLASSIFIERS:
        raise ValidationError(f"unknown classifier {name!r}; expected one of {CLASSIFIERS}")
    params = {**DEFAULT_HYPERPARAMETERS[name], **overrides}
    if name == "svm":
        reading = params.pop("kernel_reading")
        if "gamma" not in params:
            params["gamma"] = gamma_from_sigma(1.0 / rank, reading)
        return SVC(**params)
    if name == "logistic":
        return LogisticRegression(**params)
    if name == "random_forest":
        return RandomForestClassifier(random_state=seed, **params)
    return GradientBoostingClassifier(random_state=seed, **params)


__all__ = [
    "CLASSIFIERS",
    "DEFAULT_HYPERPARAMETERS",
    "DecisionTreeClassifier",
    "GradientBoostingClassifier",
    "LogisticRegression",
    "RandomForestClassifier",
    "SVC",
    "balanced_class_weights",
    "entropy",
    "gamma_from_sigma",
    "gaussian_kernel",
    "kkt_violations",
    "make_classifier",
]
