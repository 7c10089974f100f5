"""Term-document matrices and Traditional / Statistical LSA semantic spaces.

Traditional LSA decomposes the Tf-Idf matrix. Statistical LSA normalizes
the raw counts into a joint distribution ``Q``, takes its elementwise square
root (a probability amplitude) and decomposes that. Both map new documents
with ``d_r = q^T U_r Sigma_r^{-1}`` where ``q`` is the document coded the
same way as a training column.
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Document, Vocabulary, build_vocabulary, tokenize
from .exceptions import DomainError, RankClampWarning, ValidationError
from .linalg import as_matrix, truncated_svd

VARIANTS = ("traditional", "statistical")


@dataclass(frozen=True)
class TermDocumentMatrix:
    """Raw counts, ``counts[i, j]`` = occurrences of token ``i`` in document ``j``."""

    vocabulary: Vocabulary
    counts: sp.csc_matrix

    @property
    def n_docs(self):
        return self.counts.shape[1]


def _texts(documents):
    if isinstance(documents, str):
        raise ValidationError("expected a sequence of documents, got a single string")
    return [d.text if isinstance(d, Document) else d for d in documents]


def count_vectors(texts: Sequence[str], vocabulary: Vocabulary) -> sp.csc_matrix:
    """Vocabulary-indexed occurrence counts, one column per text.

    Tokens missing from ``vocabulary`` are dropped.
    """
    index = vocabulary.index
    rows, cols = [], []
    for j, text in enumerate(texts):
        for tok in tokenize(text):
            i = index.get(tok)
            if i is not None:
                rows.append(i)
                cols.append(j)
    data = np.ones(len(rows), dtype=np.int64)
    counts = sp.coo_matrix((data, (rows, cols)), shape=(len(vocabulary), len(texts)), dtype=np.int64)
    # duplicate (i, j) pairs are summed on conversion
    return counts.tocsc()


def build_term_document_matrix(documents, vocabulary: Vocabulary) -> TermDocumentMatrix:
    texts = _texts(documents)
    if not texts:
        raise ValidationError("cannot build a term-document matrix from an empty corpus")
    return TermDocumentMatrix(vocabulary, count_vectors(texts, vocabulary))


def tfidf_transform(tdm: TermDocumentMatrix):
    """Raw counts weighted by ``idf_i = ln(n / df_i)``.

    Returns the sparse Tf-Idf matrix and the idf vector.
    """
    counts = tdm.counts
    n = counts.shape[1]
    df = np.diff(counts.tocsr().indptr).astype(np.float64)
    idf = np.zeros(counts.shape[0])
    present = df > 0
    idf[present] = np.log(n / df[present])
    M = sp.diags(idf) @ counts.astype(np.float64)
    M = sp.csc_matrix(M)
    M.eliminate_zeros()
    return M, idf


def statistical_normalize(tdm: TermDocumentMatrix):
    """Counts divided by their grand total. Returns ``(Q, grand_total)``."""
    total = float(tdm.counts.sum())
    if total <= 0:
        raise DomainError("term-document matrix has no occurrences")
    return sp.csc_matrix(tdm.counts.astype(np.float64) / total), total


def probability_amplitude(B) -> np.ndarray:
    """Positive part of ``B`` scaled to unit Frobenius norm; other entries are zeroed."""
    B = as_matrix(B, "B")
    positive = np.where(B > 0, B, 0.0)
    norm = np.sqrt(np.sum(positive ** 2))
    if norm == 0.0:
        raise DomainError("probability amplitude needs at least one positive entry")
    return positive / norm


def probability_distribution(B) -> np.ndarray:
    return as_matrix(B, "B") ** 2


@dataclass(frozen=True, eq=False)
class SemanticSpace:
    """A fitted LSA space: token factors ``U`` (m x r), singular values and fold-in parameters."""

    variant: str
    vocabulary: Vocabulary
    U: np.ndarray
    sigma: np.ndarray
    idf: Optional[np.ndarray] = None
    grand_total: Optional[float] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if (self.idf is not None) != (self.variant == "traditional"):
            raise ValidationError("idf must be present exactly for the traditional variant")
        if (self.grand_total is not None) != (self.variant == "statistical"):
            raise ValidationError("grand_total must be present exactly for the statistical variant")
        if self.U.shape != (len(self.vocabulary), len(self.sigma)):
            raise ValidationError(f"U has shape {self.U.shape}, expected ({len(self.vocabulary)}, {len(self.sigma)})")
        if not np.all(self.sigma > 0):
            raise ValidationError("singular values must be strictly positive")

    @property
    def rank(self):
        return len(self.sigma)

    def truncated(self, r):
        """The same space keeping only its ``r`` leading dimensions."""
        if not 1 <= r <= self.rank:
            raise ValidationError(f"rank must be in [1, {self.rank}], got {r}")
        return SemanticSpace(self.variant, self.vocabulary, self.U[:, :r], self.sigma[:r], self.idf, self.grand_total)

    def encode(self, counts):
        """Code raw count columns the way the training matrix was coded."""
        counts = sp.csc_matrix(counts, dtype=np.float64)
        if self.variant == "traditional":
            return sp.csc_matrix(sp.diags(self.idf) @ counts)
        return counts.sqrt() / np.sqrt(self.grand_total)

    def fold_in(self, documents):
        """Map documents into the space.

        Returns ``(vectors, zero_mask)``: an ``(n, r)`` array and a boolean
        mask of documents with no in-vocabulary token, whose vectors are
        all zero.
        """
        counts = count_vectors(_texts(documents), self.vocabulary)
        q = self.encode(counts)
        vectors = np.asarray(q.T @ self.U) / self.sigma
        zero = np.diff(counts.indptr) == 0
        return vectors, zero

    def transform(self, documents):
        return self.fold_in(documents)[0]


def _processed_matrix(tdm, variant):
    if variant == "traditional":
        M, idf = tfidf_transform(tdm)
        return M, {"idf": idf}
    Q, total = statistical_normalize(tdm)
    return Q.sqrt(), {"grand_total": total}


def induce_space(documents, variant="statistical", r=100, random_state=0):
    """Induce a semantic space of rank ``r`` from training documents.

    Returns ``(space, training_vectors)`` where row ``j`` of
    ``training_vectors`` is the ``r``-dimensional code of document ``j``
    (the rows of ``V_r``). A rank above the usable rank of the processed
    matrix is clamped with a :class:`RankClampWarning`.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if r < 1:
        raise ValidationError(f"rank must be positive, got {r}")
    texts = _texts(documents)
    vocabulary = build_vocabulary(texts)
    tdm = build_term_document_matrix(texts, vocabulary)
    matrix, params = _processed_matrix(tdm, variant)
    if matrix.nnz == 0:
        raise DomainError(f"{variant} matrix is all zeros; no semantic space can be induced")
    factors = truncated_svd(matrix, r, random_state=random_state)
    if factors.k < r:
        warnings.warn(f"requested rank {r} exceeds usable rank {factors.k}; clamped to {factors.k}",
                      RankClampWarning, stacklevel=2)
    space = SemanticSpace(variant, vocabulary, factors.U, factors.sigma, **params)
    return space, factors.V


def append_star(vectors, stars):
    """Append the raw star rating as an extra trailing column."""
    vectors = np.asarray(vectors, dtype=np.float64)
    single = vectors.ndim == 1
    vectors = np.atleast_2d(vectors)
    stars = np.atleast_1d(np.asarray(stars, dtype=np.float64))
    if stars.shape != (vectors.shape[0],):
        raise ValidationError(f"need one star per vector, got {stars.shape[0]} for {vectors.shape[0]}")
    if np.any(np.isnan(stars)) or np.any((stars < 1) | (stars > 5)) or np.any(stars != np.round(stars)):
        raise ValidationError("star ratings must be integers in [1, 5]")
    out = np.column_stack([vectors, stars])
    return out[0] if single else out


class LatentSemanticAnalysis(TransformerMixin, BaseEstimator):
    """Transformer from raw texts to LSA document vectors.

    Parameters
    ----------
    variant : {"statistical", "traditional"}
    n_components : int
        Target rank; clamped (with a warning) to the usable rank.
    random_state : int
        Seed of the randomized range finder used on large matrices.

    Attributes
    ----------
    space_ : SemanticSpace
    rank_ : int
        Rank actually used.
    """

    def __init__(self, variant="statistical", n_components=100, random_state=0):
        self.variant = variant
        self.n_components = n_components
        self.random_state = random_state

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        space, vectors = induce_space(X, self.variant, self.n_components, self.random_state)
        self.space_ = space
        self.rank_ = space.rank
        return vectors

    def transform(self, X):
        check_is_fitted(self, "space_")
        return self.space_.transform(X)

    def fold_in(self, X):
        check_is_fitted(self, "space_")
        return self.space_.fold_in(X)
