"""Latent semantic spaces and classical classifiers for sarcasm detection."""

from .corpus import (
    Corpus,
    Document,
    FoldAssignment,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    stratified_kfold,
    tokenize,
    union_folds,
)
from .evaluation import (
    EvaluationReport,
    ExperimentConfig,
    MetricSet,
    compute_metrics,
    run_in_corpus,
    run_inter_corpora,
    run_union,
    sweep_and_select,
)
from .lsa import LatentSemanticAnalysis, SemanticSpace, append_star, induce_space

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Document",
    "EvaluationReport",
    "ExperimentConfig",
    "FoldAssignment",
    "LatentSemanticAnalysis",
    "MetricSet",
    "SemanticSpace",
    "Vocabulary",
    "append_star",
    "build_vocabulary",
    "compute_metrics",
    "induce_space",
    "load_corpus",
    "run_in_corpus",
    "run_inter_corpora",
    "run_union",
    "stratified_kfold",
    "sweep_and_select",
    "tokenize",
    "union_folds",
]
