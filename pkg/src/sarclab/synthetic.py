"""Synthetic labeled corpora for smoke tests and sanity checks."""

import numpy as np

from .corpus import Corpus, Document


def _words(prefix, n):
    return [f"{prefix}{i}" for i in range(n)]


def separable_corpus(n_docs=200, vocab_size=30, doc_len=12, shared_size=10, shared_rate=0.3,
                     positive_rate=0.5, seed=0, name="separable", stars=False):
    """Corpus whose two classes draw content words from disjoint vocabularies.

    A pool of ``shared_size`` filler words is common to both classes and
    makes up roughly ``shared_rate`` of each document.
    """
    rng = np.random.default_rng(seed)
    vocab = {0: _words("neg", vocab_size), 1: _words("pos", vocab_size)}
    shared = _words("the", shared_size)
    n_pos = int(round(positive_rate * n_docs))
    labels = np.array([1] * n_pos + [0] * (n_docs - n_pos))
    rng.shuffle(labels)
    docs = []
    for i, label in enumerate(labels):
        words = [shared[rng.integers(shared_size)] if rng.random() < shared_rate
                 else vocab[label][rng.integers(vocab_size)] for _ in range(doc_len)]
        star = int(rng.integers(1, 6)) if stars else None
        docs.append(Document(f"{name}-{i}", " ".join(words), int(label), star, name))
    return Corpus(name, docs)


def shuffled_labels(corpus, seed=0, name=None):
    """Copy of ``corpus`` with its labels randomly permuted."""
    rng = np.random.default_rng(seed)
    labels = rng.permutation([d.label for d in corpus.documents])
    name = name or f"{corpus.name}-shuffled"
    docs = [Document(d.id, d.text, int(y), d.star_rating, name) for d, y in zip(corpus.documents, labels)]
    return Corpus(name, docs)
