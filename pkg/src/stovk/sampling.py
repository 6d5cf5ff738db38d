"""Quasi-uniform point sets, fill distance, and the analytic test systems
used to generate data: a smooth space-time vector field on [0,1]^2 and the
scalar flow xdot = sin(2 pi x) integrated with classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloud, NonpositiveStep

#: Default RK4 step size.
DEFAULT_STEP = 1e-2


@dataclass(frozen=True)
class PointCloud:
    """Distinct points in the unit cube, tagged with the seed that made them."""

    dim: int
    points: np.ndarray
    seed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.dim)
        object.__setattr__(self, "points", pts)
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("point cloud contains duplicate points")

    def __len__(self) -> int:
        return self.points.shape[0]


def _first_primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def _radical_inverse(indices: np.ndarray, base: int) -> np.ndarray:
    """Digit-reversed fractions of ``indices`` in the given base."""
    out = np.zeros(len(indices))
    idx = indices.copy()
    denom = 1.0
    while np.any(idx > 0):
        denom *= base
        out += (idx % base) / denom
        idx //= base
    return out


def halton_points(n: int, dim: int, seed: int = 0) -> PointCloud:
    """First ``n`` Halton points in [0,1]^dim, bases = first ``dim`` primes.

    The seed shifts the start index of the sequence (indices seed+1
    through seed+n), so distinct seeds give reproducible variation while
    seed 0 reproduces the textbook sequence.
    """
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be at least 1")
    indices = np.arange(seed + 1, seed + n + 1, dtype=np.int64)
    cols = [_radical_inverse(indices, p) for p in _first_primes(dim)]
    return PointCloud(dim=dim, points=np.column_stack(cols), seed=seed)


def fill_distance(cloud: PointCloud, grid_resolution: int = 256) -> float:
    """Largest distance from a tensor-grid probe point to the cloud.

    A dense-grid lower bound on the true sup over the unit cube; it
    converges from below as the resolution grows and is exact enough at
    resolution 256 for desk-scale studies.
    """
    if len(cloud) == 0:
        raise EmptyCloud("fill distance of an empty cloud is undefined")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    axes = [np.linspace(0.0, 1.0, grid_resolution)] * cloud.dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cloud.dim)
    distances, _ = cKDTree(cloud.points).query(grid)
    return float(distances.max())


def eval_test_field(x, t) -> np.ndarray:
    """Smooth reference vector field [sin(pi x) cos(pi t), cos(pi x) sin(pi t)].

    Broadcasts over array inputs; the component axis is appended last.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.stack(
        [np.sin(np.pi * x) * np.cos(np.pi * t), np.cos(np.pi * x) * np.sin(np.pi * t)],
        axis=-1,
    )


def flow_rk4(x0, duration: float, step: float = DEFAULT_STEP):
    """Advance xdot = sin(2 pi x) by ``duration`` with classical RK4.

    The requested step is shrunk so an integer number of uniform steps
    covers the duration exactly.  The result is wrapped to [0, 1); the
    field is 1-periodic, so wrapping keeps observables well defined on
    the compact domain.  Returns a scalar for scalar input.
    """
    if step <= 0:
        raise NonpositiveStep(f"step must be positive, got {step}")
    if duration < 0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    x = np.asarray(x0, dtype=float)
    scalar_input = x.ndim == 0
    x = np.atleast_1d(x).copy()
    n_steps = max(1, math.ceil(duration / step - 1e-9))
    h = duration / n_steps

    def f(state):
        return np.sin(2.0 * np.pi * state)

    for _ in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    x = np.mod(x, 1.0)
    return float(x[0]) if scalar_input else x


@dataclass(frozen=True)
class TrajectoryPairs:
    """Snapshot pairs (x_i, flow(x_i)) separated by a fixed time step."""

    states: np.ndarray
    advanced: np.ndarray
    dt: float

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float).ravel()
        advanced = np.asarray(self.advanced, dtype=float).ravel()
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "advanced", advanced)
        if states.shape != advanced.shape:
            raise ValueError("states and advanced states must have equal length")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    def __len__(self) -> int:
        return self.states.shape[0]


def make_trajectory_pairs(n: int, dt: float, seed: int = 0) -> TrajectoryPairs:
    """Halton initial states in [0,1] advanced by one RK4 flow step of ``dt``."""
    if n < 2:
        raise ValueError(f"need at least 2 pairs, got {n}")
    states = halton_points(n, 1, seed).points[:, 0]
    advanced = flow_rk4(states, dt)
    return TrajectoryPairs(states=states, advanced=advanced, dt=dt)
