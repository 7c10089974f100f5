"""Experiment regimes: in-corpus K-fold, rank sweeps, inter-corpora transfer, union.

Every fold induces its own semantic space from the training documents only.
Test documents are folded in, so they never touch the vocabulary, the idf
weights, the grand total or the decomposition.
"""

import csv
import io
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field, replace
from itertools import permutations
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .classifiers import CLASSIFIERS, make_classifier
from .corpus import DEFAULT_SEED, Corpus, FoldAssignment, stratified_kfold, union_folds
from .exceptions import RankClampWarning, ValidationError
from .lsa import VARIANTS, append_star, induce_space

logger = logging.getLogger(__name__)

DEFAULT_RANK_GRID = (10, 20, 40, 60, 80, 100, 150, 200)
REGIMES = ("in_corpus", "inter_corpora", "union", "holdout")

CSV_COLUMNS = ("regime", "corpus_train", "corpus_test", "variant", "classifier", "rank", "fold",
               "accuracy", "precision", "recall", "f1")

_LABELS = {"svm": "SVM", "logistic": "LogReg", "random_forest": "RF", "gradient_boosting": "GB"}


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str = "statistical"
    classifier: str = "logistic"
    rank_grid: tuple = DEFAULT_RANK_GRID
    k_folds: int = 10
    seed: int = DEFAULT_SEED
    use_star: bool = False
    hyperparameters: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rank_grid", tuple(int(r) for r in self.rank_grid))
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.classifier not in CLASSIFIERS:
            raise ValidationError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        if not self.rank_grid:
            raise ValidationError("rank_grid must not be empty")
        if self.rank_grid[0] < 1 or any(b <= a for a, b in zip(self.rank_grid, self.rank_grid[1:])):
            raise ValidationError(f"rank_grid must be positive and strictly increasing, got {self.rank_grid}")
        if self.k_folds < 2:
            raise ValidationError(f"k_folds must be >= 2, got {self.k_folds}")

    def classifier_params(self, name=None):
        return dict(self.hyperparameters.get(name or self.classifier, {}))


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float

    @classmethod
    def mean_of(cls, metrics):
        return cls(*(float(np.mean([getattr(m, k) for m in metrics])) for k in ("accuracy", "precision", "recall", "f1")))


def f1_score(precision, recall):
    return 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def compute_metrics(predicted, actual) -> MetricSet:
    """Accuracy, precision, recall and F1 with class 1 as the positive class."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValidationError(f"length mismatch: {predicted.shape} vs {actual.shape}")
    if len(actual) == 0:
        raise ValidationError("cannot score an empty prediction list")
    tp = int(np.sum((predicted == 1) & (actual == 1)))
    fp = int(np.sum((predicted == 1) & (actual == 0)))
    fn = int(np.sum((predicted == 0) & (actual == 1)))
    tn = int(np.sum((predicted == 0) & (actual == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricSet((tp + tn) / len(actual), precision, recall, f1_score(precision, recall))


@dataclass(frozen=True)
class EvaluationReport:
    config: ExperimentConfig
    regime: str
    train_corpus: str
    test_corpus: str
    rank: int
    per_fold: tuple
    mean: MetricSet
    requested_rank: Optional[int] = None
    zero_vectors: int = 0

    def rows(self):
        """CSV rows, one per fold."""
        for fold, m in enumerate(self.per_fold):
            yield (self.regime, self.train_corpus, self.test_corpus, self.config.variant, self.config.classifier,
                   self.rank, fold, repr(m.accuracy), repr(m.precision), repr(m.recall), repr(m.f1))


# -- fold jobs -------------------------------------------------------------

@dataclass
class _Split:
    train_texts: list
    train_labels: np.ndarray
    train_stars: Optional[np.ndarray]
    tests: list  # (name, texts, labels, stars)


def _stack_docs(docs, use_star):
    texts = [d.text for d in docs]
    labels = np.array([d.label for d in docs], dtype=np.int64)
    stars = np.array([d.star_rating for d in docs], dtype=np.float64) if use_star else None
    return texts, labels, stars


def fold_space(train_texts, variant, max_rank, seed):
    """Induce the space for one training split, silencing (but logging) rank clamps."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RankClampWarning)
        space, vectors = induce_space(train_texts, variant, max_rank, random_state=seed)
    for w in caught:
        if issubclass(w.category, RankClampWarning):
            logger.warning("%s", w.message)
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return space, vectors


def _run_split(split, config, classifiers, ranks):
    """Metrics for every (test set, rank, classifier) of one train/test split."""
    space, train_full = fold_space(split.train_texts, config.variant, max(ranks), config.seed)
    tests = []
    for name, texts, labels, stars in split.tests:
        vectors, zero = space.fold_in(texts)
        tests.append((name, vectors, zero, labels, stars))
    out = {}
    for r in ranks:
        used = min(r, space.rank)
        Xtr = train_full[:, :used]
        if split.train_stars is not None:
            Xtr = append_star(Xtr, split.train_stars)
        for clf_name in classifiers:
            model = make_classifier(clf_name, used, config.seed, **config.classifier_params(clf_name))
            model.fit(Xtr, split.train_labels)
            for name, vectors, zero, labels, stars in tests:
                Xte = vectors[:, :used]
                if stars is not None:
                    Xte = append_star(Xte, stars)
                pred = model.predict(Xte)
                out[(name, r, clf_name)] = (used, compute_metrics(pred, labels), int(zero.sum()))
    return out


def _kfold_splits(corpora, assignment, use_star):
    for fold in range(assignment.k):
        train_docs, tests = [], []
        for corpus in corpora:
            tr, te = assignment.split(corpus, fold)
            train_docs.extend(corpus.documents[i] for i in tr)
            tests.append((corpus.name, *_stack_docs([corpus.documents[i] for i in te], use_star)))
        yield _Split(*_stack_docs(train_docs, use_star), tests)


def _execute(splits, config, classifiers, ranks):
    splits = list(splits)
    if config.n_jobs == 1 or len(splits) == 1:
        return [_run_split(s, config, classifiers, ranks) for s in splits]
    return Parallel(n_jobs=config.n_jobs)(delayed(_run_split)(s, config, classifiers, ranks) for s in splits)


def _reports(results, config, classifiers, ranks, regime, train_name, test_names):
    """Assemble reports ordered by (classifier, test corpus, rank); folds in index order."""
    reports = []
    for clf_name in classifiers:
        cfg = replace(config, classifier=clf_name)
        for test_name in test_names:
            for r in ranks:
                cells = [res[(test_name, r, clf_name)] for res in results]
                per_fold = tuple(c[1] for c in cells)
                reports.append(EvaluationReport(
                    cfg, regime, train_name, test_name, rank=min(c[0] for c in cells), per_fold=per_fold,
                    mean=MetricSet.mean_of(per_fold), requested_rank=r, zero_vectors=sum(c[2] for c in cells),
                ))
    return reports


def _classifier_list(config, classifiers):
    classifiers = tuple(classifiers or (config.classifier,))
    for c in classifiers:
        if c not in CLASSIFIERS:
            raise ValidationError(f"unknown classifier {c!r}")
    return classifiers


def _check_star(corpora, use_star):
    if use_star:
        for c in corpora:
            if not c.has_stars:
                raise ValidationError(f"use_star is set but corpus {c.name!r} lacks star ratings")


# -- regimes ---------------------------------------------------------------

def run_in_corpus(corpus: Corpus, config: ExperimentConfig, classifiers: Sequence[str] = None):
    """Stratified K-fold evaluation, one report per rank (and per classifier)."""
    classifiers = _classifier_list(config, classifiers)
    _check_star([corpus], config.use_star)
    folds = stratified_kfold(corpus, config.k_folds, config.seed)
    results = _execute(_kfold_splits([corpus], folds, config.use_star), config, classifiers, config.rank_grid)
    return _reports(results, config, classifiers, config.rank_grid, "in_corpus", corpus.name, [corpus.name])


def run_union(corpora: Sequence[Corpus], config: ExperimentConfig, classifiers: Sequence[str] = None):
    """K-fold over the concatenation of ``corpora``, scored per source corpus.

    Star ratings are never used here since corpora differ in having them.
    """
    classifiers = _classifier_list(config, classifiers)
    if config.use_star:
        logger.warning("star ratings are disabled in union experiments")
        config = replace(config, use_star=False)
    folds = union_folds(corpora, config.k_folds, config.seed)
    results = _execute(_kfold_splits(corpora, folds, False), config, classifiers, config.rank_grid)
    train_name = "+".join(c.name for c in corpora)
    return _reports(results, config, classifiers, config.rank_grid, "union", train_name, [c.name for c in corpora])


def run_inter_corpora(train: Corpus, test: Corpus, config: ExperimentConfig, rank: Optional[int] = None,
                      classifiers: Sequence[str] = None, regime="inter_corpora"):
    """Train on all of ``train`` and score every document of ``test``.

    Uses ``rank`` (default: every rank in the grid). Returns a single report
    when one rank and one classifier are evaluated, else a list.
    """
    classifiers = _classifier_list(config, classifiers)
    if train.name != test.name:
        shared = set(train.texts) & set(test.texts)
        if shared:
            logger.warning("%d text(s) of %s also occur in %s", len(shared), test.name, train.name)
    use_star = config.use_star and train.has_stars and test.has_stars
    if config.use_star and not use_star:
        logger.info("star ratings ignored: %s and %s do not both carry them", train.name, test.name)
    config = replace(config, use_star=use_star)
    ranks = (rank,) if rank is not None else config.rank_grid
    split = _Split(*_stack_docs(train.documents, use_star), [(test.name, *_stack_docs(test.documents, use_star))])
    results = [_run_split(split, config, classifiers, ranks)]
    reports = _reports(results, config, classifiers, ranks, regime, train.name, [test.name])
    return reports[0] if len(reports) == 1 else reports


def inter_corpora_pairs(corpora: Sequence[Corpus]):
    """All ordered (train, test) pairs of distinct corpora."""
    return list(permutations(corpora, 2))


def run_inter_corpora_matrix(corpora, config, classifiers=None):
    reports = []
    for train, test in inter_corpora_pairs(corpora):
        out = run_inter_corpora(train, test, config, classifiers=classifiers)
        reports.extend(out if isinstance(out, list) else [out])
    return reports


def select_best(reports):
    """Report with the highest mean F1; ties go to the smaller rank."""
    return min(reports, key=lambda r: (-r.mean.f1, r.rank))


def sweep_and_select(corpus: Corpus, config: ExperimentConfig, classifiers: Sequence[str] = None):
    """K-fold sweep over the rank grid; returns ``(best_rank, reports)``.

    With several classifiers ``best_rank`` maps classifier name to its rank.
    """
    reports = run_in_corpus(corpus, config, classifiers)
    best = {}
    for clf_name in _classifier_list(config, classifiers):
        best[clf_name] = select_best([r for r in reports if r.config.classifier == clf_name]).requested_rank
    if len(best) == 1:
        return next(iter(best.values())), reports
    return best, reports


def run_holdout(train: Corpus, test: Corpus, config: ExperimentConfig, classifiers: Sequence[str] = None):
    """Sweep ranks by K-fold on ``train``, retrain at the best rank, score ``test``."""
    classifiers = _classifier_list(config, classifiers)
    best, sweep = sweep_and_select(train, config, classifiers)
    if not isinstance(best, dict):
        best = {classifiers[0]: best}
    holdout = []
    for clf_name in classifiers:
        holdout.append(run_inter_corpora(train, test, config, rank=best[clf_name], classifiers=[clf_name],
                                         regime="holdout"))
    return best, sweep, holdout


# -- output ----------------------------------------------------------------

def reports_to_csv(reports, fh=None):
    """Write the sweep CSV; returns the text when ``fh`` is None."""
    buf = fh or io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerows(report.rows())
    if fh is None:
        return buf.getvalue()


def method_label(config):
    return f"{config.variant[0].upper()}-{_LABELS[config.classifier]}"


def summarize(reports):
    """Best-F1 row per (regime, train, test, variant, classifier), as plain dicts."""
    groups = {}
    for r in reports:
        key = (r.regime, r.train_corpus, r.test_corpus, r.config.variant, r.config.classifier)
        groups.setdefault(key, []).append(r)
    rows = []
    for (regime, train, test, variant, clf), group in groups.items():
        best = select_best(group)
        rows.append({
            "regime": regime, "train": train, "test": test, "method": method_label(best.config),
            "variant": variant, "classifier": clf, "rank": best.rank, "use_star": best.config.use_star,
            **{k: v for k, v in asdict(best.mean).items()},
        })
    return rows


def summary_table(rows):
    """Aligned text table with scores multiplied by 100, one decimal."""
    header = ("regime", "train", "test", "method", "rank", "F", "prec", "rec", "acc")
    lines = [header]
    for row in rows:
        lines.append((row["regime"], row["train"], row["test"], row["method"], str(row["rank"]),
                      *(f"{100 * row[k]:.1f}" for k in ("f1", "precision", "recall", "accuracy"))))
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in lines) + "\n"


def summary_json(rows):
    return json.dumps({"results": rows}, indent=2, sort_keys=True) + "\n"
