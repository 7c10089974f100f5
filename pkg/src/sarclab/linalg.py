"""Singular value decompositions and matrix distances.

Small and medium matrices go through LAPACK's divide-and-conquer SVD
(bidiagonalization followed by an iterative diagonalization). Matrices
whose short side exceeds ``EXACT_SVD_LIMIT`` use a randomized range finder
that only ever multiplies by the input, so sparse term-document matrices
never need to be densified.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import ConvergenceError, DomainError, RankError, ValidationError

EXACT_SVD_LIMIT = 2000
RANK_RTOL = 1e-12
OVERSAMPLING = 10
POWER_ITERATIONS = 2
# reconstruction check costs a full matmul, skip it on large inputs
RESIDUAL_CHECK_SIZE = 1_000_000


class SvdFactors(NamedTuple):
    """``M = U @ diag(sigma) @ V.T`` with ``k`` retained singular triplets."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def k(self):
        return len(self.sigma)

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


class TruncatedFactors(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return len(self.sigma)

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


def as_matrix(a, name="matrix"):
    """Validate ``a`` as a finite 2-D float64 array (sparse input is densified)."""
    if sp.issparse(a):
        a = a.toarray()
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def _flip_signs(U, V):
    # deterministic orientation: largest-magnitude entry of each U column is positive
    if U.shape[1] == 0:
        return U, V
    rows = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[rows, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def _numerical_rank(sigma):
    if len(sigma) == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > RANK_RTOL * sigma[0]))


def svd(matrix) -> SvdFactors:
    """Thin SVD keeping the numerically nonzero singular values.

    Singular values below ``1e-12 * sigma_1`` count as zero, so ``k`` is the
    numerical rank of ``matrix``.
    """
    a = as_matrix(matrix)
    try:
        U, s, Vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        try:
            U, s, Vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd", check_finite=False)
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                f"SVD did not converge on a {a.shape[0]}x{a.shape[1]} matrix",
                residual=float("nan"),
            ) from None
    k = _numerical_rank(s)
    U, V = _flip_signs(U[:, :k], Vt[:k].T)
    factors = SvdFactors(np.ascontiguousarray(U), s[:k].copy(), np.ascontiguousarray(V))
    if a.size <= RESIDUAL_CHECK_SIZE:
        _check_residual(a, factors)
    return factors


def _check_residual(a, factors, rtol=1e-8):
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return
    residual = np.linalg.norm(a - factors.reconstruct()) / norm
    if residual > rtol:
        raise ConvergenceError(f"SVD reconstruction residual {residual:.3e} exceeds {rtol:.0e}", residual=residual)


def truncate(factors: SvdFactors, r: int) -> TruncatedFactors:
    """Keep the ``r`` leading singular triplets."""
    if not 1 <= r <= factors.k:
        raise RankError(f"truncation rank must be in [1, {factors.k}], got {r}")
    return TruncatedFactors(factors.U[:, :r], factors.sigma[:r], factors.V[:, :r])


def randomized_svd(matrix, r, oversampling=OVERSAMPLING, n_power_iter=POWER_ITERATIONS, random_state=0):
    """Approximate leading ``r`` singular triplets via a randomized range finder.

    ``matrix`` may be dense or scipy-sparse; it is only used through
    products with dense blocks.
    """
    if not sp.issparse(matrix):
        matrix = as_matrix(matrix)
    elif not np.all(np.isfinite(matrix.data)):
        raise ValidationError("matrix contains non-finite entries")
    m, n = matrix.shape
    width = min(r + oversampling, m, n)
    rng = np.random.default_rng(random_state)
    Y = matrix @ rng.standard_normal((n, width))
    Q, _ = np.linalg.qr(Y)
    for _ in range(n_power_iter):
        Z, _ = np.linalg.qr(matrix.T @ Q)
        Q, _ = np.linalg.qr(matrix @ Z)
    B = np.asarray((matrix.T @ Q).T)
    Ub, s, Vt = scipy.linalg.svd(B, full_matrices=False, lapack_driver="gesdd")
    k = min(r, _numerical_rank(s))
    U, V = _flip_signs(Q @ Ub[:, :k], Vt[:k].T)
    return SvdFactors(U, s[:k], V)


def truncated_svd(matrix, r, random_state=0) -> SvdFactors:
    """Leading ``min(r, rank)`` singular triplets of ``matrix``.

    Exact decomposition when the short side is at most ``EXACT_SVD_LIMIT``,
    randomized otherwise.
    """
    if r < 1:
        raise RankError(f"rank must be positive, got {r}")
    if min(matrix.shape) <= EXACT_SVD_LIMIT:
        full = svd(matrix)
        return SvdFactors(full.U[:, :r], full.sigma[:r], full.V[:, :r])
    return randomized_svd(matrix, r, random_state=random_state)


def _pair(a, b):
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def frobenius_distance(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.sum((b - a) ** 2)))


def hellinger_distance(a, b) -> float:
    """Frobenius distance between the elementwise square roots of ``a`` and ``b``."""
    a, b = _pair(a, b)
    if (a < 0).any() or (b < 0).any():
        raise DomainError("Hellinger distance needs non-negative entries")
    return float(np.sqrt(np.sum((np.sqrt(b) - np.sqrt(a)) ** 2)))
