import json

import numpy as np
import pytest

from sarclab.corpus import Corpus, Document


def make_corpus(texts, labels, name="c", stars=None):
    stars = stars or [None] * len(texts)
    docs = [Document(f"{name}-{i}", t, y, s, name) for i, (t, y, s) in enumerate(zip(texts, labels, stars))]
    return Corpus(name, docs)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


def corpus_records(corpus):
    out = []
    for d in corpus.documents:
        rec = {"id": d.id, "text": d.text, "label": d.label}
        if d.star_rating is not None:
            rec["star"] = d.star_rating
        out.append(rec)
    return out


def blobs(n=200, margin=1.0, seed=0):
    """Two Gaussian clouds separated by a gap of ``margin`` along the first axis."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(scale=0.3, size=(n, 2))
    X[:, 0] = np.abs(X[:, 0]) + margin / 2
    X[y == 0, 0] *= -1
    return X, y


@pytest.fixture
def xor():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    return X, y


# Acceptance verdicts collected by test_acceptance.py, printed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
