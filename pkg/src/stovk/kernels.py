"""Scalar Gaussian kernels, their temporal derivatives, and operator-valued
space-time kernels acting as a scalar factor times the identity on R^d.

Closed forms for the Gaussian family, writing u = t - t':

    k(t, t')            = exp(-u^2 / sigma^2)
    d/dt k              = (-2 u / sigma^2) k
    d2/(dt dt') k       = (2 / sigma^2 - 4 u^2 / sigma^4) k
    d3/(dt^2 dt') k     = (-12 u / sigma^4 + 8 u^3 / sigma^6) k

The cross-derivative d2/(dt dt') k is the Gram of derivative features, so
it is itself a positive definite kernel and must be positive at u = 0;
flipping its sign breaks positive-definiteness, which the Gram eigenvalue
tests enforce.

Operator-valued kernels are represented by their scalar factor only: every
evaluation is that factor times I_d, so the dN x dN block Gram matrix is
the Kronecker product of the scalar N x N Gram with I_d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnsupportedFamily

GAUSSIAN = "gaussian"
SEPARABLE = "separable"
TIME_ALIGNED = "time-aligned"


@dataclass(frozen=True)
class ScalarKernel:
    """Scalar positive definite kernel spec: bandwidth plus family tag.

    ``bandwidth`` shares units with the input coordinate.  Only the
    Gaussian family is implemented; the tag leaves room for Matern or
    Wendland variants, whose evaluations raise :class:`UnsupportedFamily`.
    """

    bandwidth: float
    family: str = GAUSSIAN

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class OperatorKernel:
    """Operator-valued kernel over (x, t) pairs, acting as scalar * I_d.

    Separable mode multiplies spatial and temporal Gaussian factors.
    Time-aligned mode augments the temporal factor with ``alpha`` times
    the temporal cross-derivative kernel, penalizing misaligned time
    derivatives on top of misaligned values; ``alpha = 0`` reduces it to
    the separable kernel exactly.
    """

    spatial: ScalarKernel
    temporal: ScalarKernel
    mode: str = SEPARABLE
    alpha: float = 0.0
    output_dim: int = 2

    def __post_init__(self):
        if self.mode not in (SEPARABLE, TIME_ALIGNED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.output_dim < 1:
            raise ValueError(f"output_dim must be positive, got {self.output_dim}")


def _require_gaussian(spec: ScalarKernel, op: str) -> None:
    if spec.family != GAUSSIAN:
        raise UnsupportedFamily(f"{op} is only implemented for the Gaussian family")


# Elementwise closed forms; u may be any ndarray of time differences.

def _gauss(u2, sigma):
    return np.exp(-u2 / sigma**2)


def _gauss_dt(u, sigma):
    return (-2.0 * u / sigma**2) * np.exp(-(u * u) / sigma**2)


def _gauss_dt_dtp(u, sigma):
    u2 = u * u
    return (2.0 / sigma**2 - 4.0 * u2 / sigma**4) * np.exp(-u2 / sigma**2)


def _gauss_dt2_dtp(u, sigma):
    u2 = u * u
    return (-12.0 * u / sigma**4 + 8.0 * u * u2 / sigma**6) * np.exp(-u2 / sigma**2)


def _as_points(a) -> np.ndarray:
    """Coerce scalars / vectors / point lists to a 2-D (n, dim) array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim == 2:
        return arr
    raise DimensionMismatch(f"points must be at most 2-D, got shape {arr.shape}")


def _as_single_point(u) -> np.ndarray:
    """Coerce one (possibly multivariate) point to a (1, dim) array."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(1, -1)
    raise DimensionMismatch(f"a point must be a scalar or 1-D, got shape {arr.shape}")


def _pairwise_sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"point dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("mnd,mnd->mn", diff, diff)


def scalar_gram(spec: ScalarKernel, a, b=None) -> np.ndarray:
    """Matrix of kernel values k(a_i, b_j); ``b`` defaults to ``a``."""
    _require_gaussian(spec, "scalar_gram")
    pa = _as_points(a)
    pb = pa if b is None else _as_points(b)
    return _gauss(_pairwise_sqdist(pa, pb), spec.bandwidth)


def eval_scalar(spec: ScalarKernel, u, v) -> float:
    """Gaussian kernel value exp(-|u - v|^2 / sigma^2); lies in (0, 1]."""
    return float(scalar_gram(spec, _as_single_point(u), _as_single_point(v))[0, 0])


def eval_dt_dtprime(spec: ScalarKernel, t: float, tprime: float) -> float:
    """Temporal cross-derivative d2/(dt dt') of the Gaussian kernel.

    Symmetric in (t, t') and positive at t = t', where it equals
    2 / sigma^2; the zero crossings sit at |t - t'| = sigma / sqrt(2).
    """
    _require_gaussian(spec, "eval_dt_dtprime")
    return float(_gauss_dt_dtp(float(t) - float(tprime), spec.bandwidth))


def temporal_factor(spec: OperatorKernel, ta, tb) -> np.ndarray:
    """Pairwise temporal factor: k_t alone, or k_t + alpha * d2/(dt dt') k_t."""
    _require_gaussian(spec.temporal, "temporal_factor")
    u = np.subtract.outer(np.asarray(ta, dtype=float), np.asarray(tb, dtype=float))
    sigma = spec.temporal.bandwidth
    kt = _gauss(u * u, sigma)
    if spec.mode == TIME_ALIGNED:
        kt = kt + spec.alpha * _gauss_dt_dtp(u, sigma)
    return kt


def temporal_factor_dt(spec: OperatorKernel, ta, tb) -> np.ndarray:
    """Derivative of :func:`temporal_factor` in the first time argument."""
    _require_gaussian(spec.temporal, "temporal_factor_dt")
    u = np.subtract.outer(np.asarray(ta, dtype=float), np.asarray(tb, dtype=float))
    sigma = spec.temporal.bandwidth
    dt = _gauss_dt(u, sigma)
    if spec.mode == TIME_ALIGNED:
        dt = dt + spec.alpha * _gauss_dt2_dtp(u, sigma)
    return dt


def operator_gram(spec: OperatorKernel, xa, ta, xb=None, tb=None) -> np.ndarray:
    """Pairwise scalar factors of the operator kernel over (x, t) pairs.

    Entry (i, j) is the factor multiplying I_d in K((xa_i, ta_i),
    (xb_j, tb_j)).  With ``xb``/``tb`` omitted this is the symmetric Gram
    of the first point set.
    """
    _require_gaussian(spec.spatial, "operator_gram")
    pa = _as_points(xa)
    pb = pa if xb is None else _as_points(xb)
    tb = ta if tb is None else tb
    kx = _gauss(_pairwise_sqdist(pa, pb), spec.spatial.bandwidth)
    return kx * temporal_factor(spec, ta, tb)


def operator_gram_dt(spec: OperatorKernel, xa, ta, xb, tb) -> np.ndarray:
    """Pairwise scalar factors of d/dt K((x, t), (x', t')) in the first t."""
    pa = _as_points(xa)
    pb = _as_points(xb)
    kx = _gauss(_pairwise_sqdist(pa, pb), spec.spatial.bandwidth)
    return kx * temporal_factor_dt(spec, ta, tb)


def _split_point(p):
    x, t = p
    return _as_single_point(x), np.atleast_1d(np.asarray(t, dtype=float))


def eval_operator(spec: OperatorKernel, p, q) -> float:
    """Scalar factor of the operator kernel at the pair of (x, t) points.

    Separable mode returns k_x * k_t; time-aligned mode returns
    k_x * (k_t + alpha * d2/(dt dt') k_t).  Symmetric under swapping
    ``p`` and ``q``.
    """
    xa, ta = _split_point(p)
    xb, tb = _split_point(q)
    return float(operator_gram(spec, xa, ta, xb, tb)[0, 0])


def eval_dt_operator(spec: OperatorKernel, p, q) -> float:
    """Scalar factor of the first-time-argument derivative of the kernel.

    In time-aligned mode this includes the third temporal derivative of
    the base Gaussian, so derivative predictions stay exact for the
    combined kernel.
    """
    xa, ta = _split_point(p)
    xb, tb = _split_point(q)
    return float(operator_gram_dt(spec, xa, ta, xb, tb)[0, 0])
