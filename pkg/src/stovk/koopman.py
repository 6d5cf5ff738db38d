"""Empirical kernel Koopman operator from snapshot pairs, its spectrum,
and rank-truncated spectral forecasting.

Given pairs (x_i, y_i) with y_i = flow(x_i) and a scalar kernel k, the
model forms

    G[i, j]  = k(x_i, x_j)          Gram at the current states
    G'[i, j] = k(y_i, x_j)          kernel between advanced states and centers
    K_N      = pinv(G) @ G'         empirical Koopman matrix

K_N maps expansion coefficients a of g = sum_j a_j k(., x_j) to the
coefficients of (an approximation of) g o flow: the rows of G' evaluate
the expansion at the advanced states, and pinv(G) interpolates those
values back onto the centers.  One Koopman step on observable values is
therefore G' @ pinv(G) @ values: interpolate, then evaluate at the
advanced states.

Eigenvectors v_k of K_N are coefficient vectors of approximate Koopman
eigenfunctions; their values at the centers are G v_k, and those value
vectors power the rank-truncated forecast sum_k m_k lambda_k^steps (G v_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RankOutOfRange
from .kernels import ScalarKernel, scalar_gram
from .linalg import DEFAULT_PINV_TOL, SpectralDecomposition, eig_general, truncated_pinv
from .sampling import TrajectoryPairs


@dataclass(frozen=True)
class KoopmanModel:
    """Gram factors, operator matrix, and spectrum of the empirical Koopman fit."""

    centers: np.ndarray
    advanced: np.ndarray
    kernel: ScalarKernel
    dt: float
    gram: np.ndarray = field(repr=False)
    gram_adv: np.ndarray = field(repr=False)
    gram_pinv: np.ndarray = field(repr=False)
    operator: np.ndarray = field(repr=False)
    spectrum: SpectralDecomposition = field(repr=False)
    pinv_tol: float = DEFAULT_PINV_TOL

    def __len__(self) -> int:
        return self.centers.shape[0]


def fit_koopman(
    pairs: TrajectoryPairs, kernel: ScalarKernel, pinv_tol: float = DEFAULT_PINV_TOL
) -> KoopmanModel:
    """Build G, G', K_N = pinv(G) G' and its spectral decomposition."""
    if len(pairs) < 2:
        raise ValueError("need at least 2 trajectory pairs")
    centers = pairs.states
    gram = scalar_gram(kernel, centers)
    gram_adv = scalar_gram(kernel, pairs.advanced, centers)
    gram_pinv = truncated_pinv(gram, pinv_tol)
    operator = gram_pinv @ gram_adv
    spectrum = eig_general(operator)
    return KoopmanModel(
        centers=centers,
        advanced=pairs.advanced,
        kernel=kernel,
        dt=pairs.dt,
        gram=gram,
        gram_adv=gram_adv,
        gram_pinv=gram_pinv,
        operator=operator,
        spectrum=spectrum,
        pinv_tol=pinv_tol,
    )


def koopman_apply(model: KoopmanModel, g_samples) -> np.ndarray:
    """One empirical Koopman step on observable values at the centers.

    Interpolates the samples in the kernel span and evaluates the
    interpolant at the advanced states, so for observables in that span
    the output approximates g(flow(x_i)).  Accepts (n,) or (n, d) samples.
    """
    g = np.asarray(g_samples, dtype=float)
    if g.shape[0] != len(model):
        raise DimensionMismatch(
            f"expected {len(model)} samples (one per center), got {g.shape[0]}"
        )
    return model.gram_adv @ (model.gram_pinv @ g)


@dataclass
class SpectralForecast:
    """Rank-truncated spectral expansion of an observable.

    ``basis`` holds the retained eigenfunction values at the centers
    (columns G v_k), ``modes`` the least-squares projection of the
    observable onto them.  ``max_imag_ratio`` accumulates the largest
    relative imaginary residual seen when taking real parts; it stays at
    rounding level as long as retained conjugate pairs are not split.
    """

    rank: int
    eigenvalues: np.ndarray
    modes: np.ndarray
    basis: np.ndarray
    max_imag_ratio: float = 0.0


def build_forecast(model: KoopmanModel, observable, rank: int) -> SpectralForecast:
    """Project an observable onto the leading ``rank`` eigenfunctions.

    The modes solve the least-squares problem min |B m - f| over the
    eigenfunction-value basis B = G V_r via truncated pseudoinverse, so
    the step-0 reconstruction error is non-increasing in the rank.
    """
    f = np.asarray(observable, dtype=float)
    if f.ndim == 1:
        f = f.reshape(-1, 1)
    if f.shape[0] != len(model):
        raise DimensionMismatch(
            f"expected {len(model)} observable samples, got {f.shape[0]}"
        )
    if not 1 <= rank <= len(model):
        raise RankOutOfRange(f"rank must lie in [1, {len(model)}], got {rank}")
    vectors = model.spectrum.eigenvectors[:, :rank]
    basis = model.gram @ vectors
    modes = np.linalg.pinv(basis, rcond=model.pinv_tol) @ f
    return SpectralForecast(
        rank=rank,
        eigenvalues=model.spectrum.eigenvalues[:rank].copy(),
        modes=modes,
        basis=basis,
    )


def forecast_at(fc: SpectralForecast, steps: int) -> np.ndarray:
    """Evaluate sum_k modes_k lambda_k^steps phi_k at the centers.

    Returns the real part; the relative imaginary residual is folded into
    ``fc.max_imag_ratio`` as a diagnostic.  Step 0 reproduces the rank-r
    reconstruction of the observable.
    """
    if steps < 0:
        raise ValueError(f"steps must be nonnegative, got {steps}")
    weights = fc.eigenvalues**steps
    values = fc.basis @ (weights[:, None] * fc.modes)
    scale = float(np.linalg.norm(values.real))
    imag = float(np.linalg.norm(values.imag))
    if scale > 0.0:
        fc.max_imag_ratio = max(fc.max_imag_ratio, imag / scale)
    return values.real
