"""Dense linear algebra primitives used throughout the package.

Matrices are plain float64 numpy arrays; :func:`as_matrix` enforces the
entry contract (2-D, all entries finite) at module boundaries.  The three
operations here back the kernel solvers: symmetric positive definite
solves with a single deterministic jitter retry, a truncated-SVD
Moore-Penrose pseudoinverse, and a general eigendecomposition with a
deterministic ordering and phase convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NotPositiveDefinite, ZeroMatrix

#: Absolute symmetry tolerance for SPD solves, relative to the largest entry.
SYMMETRY_TOL = 1e-10

#: Default relative singular-value cutoff for the truncated pseudoinverse.
DEFAULT_PINV_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def chol_factor(a: np.ndarray):
    """Cholesky-factor ``a`` with one deterministic jitter retry.

    Returns ``(factor, jitter)`` where ``factor`` is the pair accepted by
    :func:`scipy.linalg.cho_solve` and ``jitter`` is the amount added to
    the diagonal (0.0 when the first attempt succeeds).  The retry adds
    ``1e-10 * trace(a) / n``, enough to rescue Gram matrices from
    clustered centers without hurting reproducibility.

    Raises
    ------
    NotPositiveDefinite
        If factorization fails even with the jitter.
    """
    try:
        return scipy.linalg.cho_factor(a, lower=True), 0.0
    except scipy.linalg.LinAlgError:
        pass
    n = a.shape[0]
    jitter = 1e-10 * float(np.trace(a)) / n
    try:
        factor = scipy.linalg.cho_factor(a + jitter * np.eye(n), lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (jitter {jitter:.3e} did not help)"
        ) from exc
    return factor, jitter


def spd_solve(a, b) -> np.ndarray:
    """Solve ``A X = B`` for symmetric positive definite ``A``.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric (to within :data:`SYMMETRY_TOL` relative to the largest
        entry) positive definite matrix.
    b : (n,) or (n, k) array_like
        Right-hand side(s).

    Returns
    -------
    ndarray
        Solution with the same trailing shape as ``b``.  The max-norm
        residual ``|A X - B|`` stays below ``1e-8 * (1 + |B|_max)`` for
        well-posed systems; tests recompute it rather than trusting the
        factorization.
    """
    a = as_matrix(a, "A")
    n, m = a.shape
    if n != m:
        raise ValueError(f"A must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_TOL * scale:
        raise ValueError("A is not symmetric to tolerance 1e-10")
    b_arr = np.asarray(b, dtype=float)
    if b_arr.shape[0] != n:
        raise ValueError(f"B has {b_arr.shape[0]} rows, expected {n}")
    if not np.all(np.isfinite(b_arr)):
        raise ValueError("B contains non-finite entries")
    factor, _ = chol_factor(a)
    return scipy.linalg.cho_solve(factor, b_arr)


def truncated_pinv(a, rel_tol: float = DEFAULT_PINV_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD truncation.

    Singular values below ``rel_tol * sigma_max`` are discarded, which
    gives a clean rank contract: the Moore-Penrose identities hold on the
    retained subspace.

    Raises
    ------
    ZeroMatrix
        If the largest singular value is exactly zero.
    """
    a = as_matrix(a, "A")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise ZeroMatrix("cannot pseudo-invert a matrix with zero spectrum")
    inv = np.where(s > rel_tol * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (vt.T * inv) @ u.T


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs sorted by descending modulus with a deterministic phase.

    Column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``.  Every
    column has unit Euclidean norm and is rotated so its largest-modulus
    entry is real and nonnegative, which makes decompositions comparable
    across runs.  Complex conjugate pairs end up adjacent because ties in
    modulus are broken by descending real part, then descending imaginary
    part.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        if self.eigenvalues.shape[0] != self.eigenvectors.shape[1]:
            raise ValueError("one eigenvalue required per eigenvector column")


def eig_general(a) -> SpectralDecomposition:
    """Eigendecomposition of a general (possibly non-symmetric) matrix.

    Each returned pair satisfies ``|A v - lambda v|_2 <= 1e-6 * |A|_F``;
    ordering and phase follow :class:`SpectralDecomposition`.

    Raises
    ------
    ConvergenceFailure
        If the underlying QR iteration does not converge.
    """
    a = as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got shape {a.shape}")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver failed on {a.shape} input") from exc
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    values = values[order]
    vectors = vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    lead = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]
    vectors = vectors * (np.conj(lead) / np.abs(lead))
    return SpectralDecomposition(values, vectors)
