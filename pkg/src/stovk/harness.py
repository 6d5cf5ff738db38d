"""Experiment harness: configuration, quadrature error metrics, rate
fitting, the three convergence studies, and CSV/JSON emission.

Experiment 1 fits the smooth reference vector field from gridded
space-time samples and tracks the L2 error as the sample count grows.
Experiment 2 builds empirical Koopman operators from snapshot pairs of
the scalar flow and tracks eigenvalue stabilization plus the operator
action error.  Experiment 3 forecasts a vector observable through the
Koopman spectrum at increasing truncation ranks.

All defaults that the underlying studies leave open (bandwidths, sample
grids, noise levels, time step) are engineering choices and are stamped
into every output record so results are self-describing.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, NonpositiveValue
from .kernels import SEPARABLE, TIME_ALIGNED, OperatorKernel, ScalarKernel
from .koopman import build_forecast, fit_koopman, forecast_at, koopman_apply
from .ovkr import FittedField, RidgeConfig, TrainingSet, assemble_block_gram, fit, predict_batch
from .sampling import PointCloud, eval_test_field, fill_distance, flow_rk4, make_trajectory_pairs

EXPERIMENTS = ("exp1", "exp2", "exp3")
SAMPLERS = ("uniform", "halton")

CONVERGENCE_COLUMNS = (
    "experiment", "N", "fill_distance", "lambda", "alpha", "kernel_mode",
    "noise_std", "l2_error", "runtime_ms", "seed",
)
SPECTRUM_COLUMNS = ("experiment", "N", "k", "eig_re", "eig_im", "eig_abs", "action_error", "seed")
FORECAST_COLUMNS = ("experiment", "N", "rank", "step", "t", "err", "seed")

#: Number of leading eigenvalues recorded per run in experiment 2.
TOP_EIGENVALUES = 8

#: Grid resolution per axis for fill-distance measurements.
FILL_GRID_RESOLUTION = 256


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run; every field lands in the output."""

    experiment: str
    n_values: tuple = (16, 64, 256, 1024)
    lam: float = 1e-8
    lam_schedule_r: float | None = None  # when set, lambda = N^(-1/(2r+1))
    sigma_x: float = 0.3
    sigma_t: float = 0.3
    alpha: float = 0.5
    kernel_mode: str = SEPARABLE
    sampler: str = "halton"
    noise_std: float = 0.0
    dt: float = 0.05
    horizon: int = 40
    ranks: tuple = (1, 2, 4, 8, 16)
    seed: int = 42
    quad_res: int = 64
    pinv_tol: float = 1e-10
    timing: bool = True  # False zeroes runtime_ms for byte-reproducible output

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not self.n_values:
            raise ConfigError("sample count list must be nonempty")
        if any(n < 1 for n in self.n_values):
            raise ConfigError("sample counts must be positive")
        if any(b >= a for a, b in zip(self.n_values[1:], self.n_values)):
            raise ConfigError("sample count list must be strictly increasing")
        if not self.lam > 0:
            raise ConfigError("lambda must be positive")
        if self.lam_schedule_r is not None and not self.lam_schedule_r > 0:
            raise ConfigError("schedule exponent r must be positive")
        for name in ("sigma_x", "sigma_t", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.alpha < 0 or self.noise_std < 0:
            raise ConfigError("alpha and noise_std must be nonnegative")
        if self.kernel_mode not in (SEPARABLE, TIME_ALIGNED):
            raise ConfigError(f"unknown kernel mode {self.kernel_mode!r}")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}")
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if not self.ranks or any(r < 1 for r in self.ranks):
            raise ConfigError("ranks must be positive")
        if self.quad_res < 8:
            raise ConfigError("quad_res must be at least 8")
        if not 0.0 < self.pinv_tol < 1.0:
            raise ConfigError("pinv_tol must lie in (0, 1)")

    def effective_lambda(self, n: int) -> float:
        if self.lam_schedule_r is not None:
            return float(n) ** (-1.0 / (2.0 * self.lam_schedule_r + 1.0))
        return self.lam

    def snapshot(self) -> dict:
        params = asdict(self)
        params["n_values"] = list(self.n_values)
        params["ranks"] = list(self.ranks)
        return params


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Per-experiment defaults; keyword overrides win."""
    defaults: dict = {"experiment": experiment}
    if experiment == "exp2":
        defaults.update(n_values=(50, 100, 200, 400), sigma_x=0.2)
    elif experiment == "exp3":
        defaults.update(n_values=(400,), sigma_x=0.2)
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


@dataclass
class ResultRecord:
    """Parameter snapshot plus plot-ready metric rows for one experiment."""

    experiment: str
    params: dict
    rows: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    slope: float | None = None


def l2_error_quadrature(f, g, resolution: int = 64) -> float:
    """L2 distance of two fields over [0,1]^2 by Gauss-Legendre quadrature.

    ``f`` and ``g`` are callables mapping equal-length coordinate arrays
    (x, t) to (m, d) value arrays.  Gauss-Legendre is spectrally accurate
    for the smooth integrands involved, so resolution 64 per axis is far
    beyond the accuracy any error level here needs.
    """
    if resolution < 8:
        raise ValueError(f"resolution must be at least 8, got {resolution}")
    nodes, weights = np.polynomial.legendre.leggauss(resolution)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    qx, qt = (grid.ravel() for grid in np.meshgrid(nodes, nodes, indexing="ij"))
    w2 = np.outer(weights, weights).ravel()
    diff = np.asarray(f(qx, qt), dtype=float) - np.asarray(g(qx, qt), dtype=float)
    if diff.ndim == 1:
        diff = diff[:, None]
    return float(math.sqrt(float(w2 @ np.sum(diff * diff, axis=1))))


def loglog_slope(ns, errs) -> float:
    """Least-squares slope of log(err) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if ns.size < 2:
        raise ValueError("need at least two points to fit a slope")
    if np.any(ns <= 0) or np.any(errs <= 0):
        raise NonpositiveValue("log-log fit requires strictly positive values")
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def _require(cfg: ExperimentConfig, experiment: str) -> None:
    if cfg.experiment != experiment:
        raise ConfigError(f"config is for {cfg.experiment!r}, expected {experiment!r}")


def _elapsed_ms(cfg: ExperimentConfig, start: float) -> float:
    return (time.perf_counter() - start) * 1e3 if cfg.timing else 0.0


def _exp1_grid(cfg: ExperimentConfig, n_requested: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Gridded inputs: n_x spatial points crossed with n_t uniform times.

    n_t = round(sqrt(N)) and n_x = N // n_t, so perfect squares give the
    requested count exactly and other values the closest grid below it.
    """
    n_t = max(1, round(math.sqrt(n_requested)))
    n_x = max(1, n_requested // n_t)
    if cfg.sampler == "halton":
        from .sampling import halton_points

        xs = halton_points(n_x, 1, cfg.seed).points[:, 0]
    else:
        xs = rng.uniform(size=n_x)
    ts = np.arange(1, n_t + 1, dtype=float) / n_t
    return np.repeat(xs, n_t), np.tile(ts, n_x)


def run_exp1(cfg: ExperimentConfig) -> ResultRecord:
    """Convergence study of the kernel ridge fit to the reference field."""
    _require(cfg, "exp1")
    rng = np.random.default_rng(cfg.seed)
    kernel = OperatorKernel(
        spatial=ScalarKernel(cfg.sigma_x),
        temporal=ScalarKernel(cfg.sigma_t),
        mode=cfg.kernel_mode,
        alpha=cfg.alpha,
        output_dim=2,
    )
    record = ResultRecord(experiment="exp1", params=cfg.snapshot())
    ns, errors, fills = [], [], []
    for n_requested in cfg.n_values:
        start = time.perf_counter()
        x, t = _exp1_grid(cfg, n_requested, rng)
        y = eval_test_field(x, t)
        if cfg.noise_std > 0:
            y = y + cfg.noise_std * rng.standard_normal(y.shape)
        n = x.size
        lam = cfg.effective_lambda(n)
        model = fit(TrainingSet(x, t, y), RidgeConfig(lam, kernel))
        error = l2_error_quadrature(
            lambda qx, qt: predict_batch(model, qx, qt), eval_test_field, cfg.quad_res
        )
        cloud = PointCloud(2, np.column_stack([x, t]), cfg.seed)
        fill = fill_distance(cloud, FILL_GRID_RESOLUTION)
        record.rows.append({
            "experiment": "exp1",
            "N": n,
            "fill_distance": fill,
            "lambda": lam,
            "alpha": cfg.alpha,
            "kernel_mode": cfg.kernel_mode,
            "noise_std": cfg.noise_std,
            "l2_error": error,
            "runtime_ms": _elapsed_ms(cfg, start),
            "seed": cfg.seed,
        })
        ns.append(n)
        errors.append(error)
        fills.append(fill)
    record.metrics = {"n": ns, "l2_error": errors, "fill_distance": fills}
    if len(ns) >= 2:
        record.slope = loglog_slope(ns, errors)
    return record


def run_exp2(cfg: ExperimentConfig) -> ResultRecord:
    """Koopman eigenvalue stabilization and operator-action error study.

    The operator norm gap to the true Koopman operator is not computable,
    so the recorded surrogate is the sup error over centers of one
    empirical Koopman step against direct flow evaluation of
    g(x) = sin(2 pi x).
    """
    _require(cfg, "exp2")
    kernel = ScalarKernel(cfg.sigma_x)
    record = ResultRecord(experiment="exp2", params=cfg.snapshot())
    ns, action_errors, eigs_by_n = [], [], []
    for n in cfg.n_values:
        start = time.perf_counter()
        pairs = make_trajectory_pairs(n, cfg.dt, cfg.seed)
        model = fit_koopman(pairs, kernel, cfg.pinv_tol)
        g = np.sin(2.0 * np.pi * pairs.states)
        action_error = float(
            np.max(np.abs(koopman_apply(model, g) - np.sin(2.0 * np.pi * pairs.advanced)))
        )
        runtime = _elapsed_ms(cfg, start)
        eigs = model.spectrum.eigenvalues[: min(TOP_EIGENVALUES, n)]
        for k, value in enumerate(eigs, start=1):
            record.rows.append({
                "experiment": "exp2",
                "N": n,
                "k": k,
                "eig_re": float(value.real),
                "eig_im": float(value.imag),
                "eig_abs": float(abs(value)),
                "action_error": action_error,
                "runtime_ms": runtime,
                "seed": cfg.seed,
            })
        ns.append(n)
        action_errors.append(action_error)
        eigs_by_n.append(eigs)
    gaps = {}
    for k in range(min(3, min(len(e) for e in eigs_by_n))):
        gaps[f"k{k + 1}"] = [
            float(abs(eigs_by_n[i + 1][k] - eigs_by_n[i][k])) for i in range(len(ns) - 1)
        ]
    record.metrics = {
        "n": ns,
        "action_error": action_errors,
        "stabilization_gaps": gaps,
        "leading_eig_abs": [float(abs(e[0])) for e in eigs_by_n],
    }
    if len(ns) >= 2:
        record.slope = loglog_slope(ns, action_errors)
    return record


def run_exp3(cfg: ExperimentConfig) -> ResultRecord:
    """Rank-truncated spectral forecasting of f(x) = [sin, cos](2 pi x).

    The Koopman model is built at the largest configured sample count.
    Err_r(step) is a center-averaged RMS against direct flow evaluation,
    since the forecast is defined at the centers.
    """
    _require(cfg, "exp3")
    n = cfg.n_values[-1]
    pairs = make_trajectory_pairs(n, cfg.dt, cfg.seed)
    model = fit_koopman(pairs, ScalarKernel(cfg.sigma_x), cfg.pinv_tol)

    def observable(states):
        angle = 2.0 * np.pi * states
        return np.column_stack([np.sin(angle), np.cos(angle)])

    obs0 = observable(pairs.states)
    truths = [obs0]
    states = pairs.states
    for _ in range(cfg.horizon):
        states = flow_rk4(states, cfg.dt)
        truths.append(observable(states))

    record = ResultRecord(experiment="exp3", params=cfg.snapshot())
    err_at_zero, imag_ratios = [], []
    for rank in cfg.ranks:
        fc = build_forecast(model, obs0, rank)
        for step in range(cfg.horizon + 1):
            values = forecast_at(fc, step)
            err = float(math.sqrt(float(np.mean(np.sum((values - truths[step]) ** 2, axis=1)))))
            record.rows.append({
                "experiment": "exp3",
                "N": n,
                "rank": rank,
                "step": step,
                "t": step * cfg.dt,
                "err": err,
                "seed": cfg.seed,
            })
            if step == 0:
                err_at_zero.append(err)
        imag_ratios.append(fc.max_imag_ratio)
    record.metrics = {
        "n": n,
        "ranks": list(cfg.ranks),
        "err_at_step0": err_at_zero,
        "max_imag_ratio": imag_ratios,
        "max_eig_abs": float(np.abs(model.spectrum.eigenvalues).max()),
    }
    return record


def run_experiment(cfg: ExperimentConfig) -> ResultRecord:
    runner = {"exp1": run_exp1, "exp2": run_exp2, "exp3": run_exp3}[cfg.experiment]
    return runner(cfg)


# ---------------------------------------------------------------------------
# Emission.  Floats are written with 17 significant digits so parsing and
# re-emitting a file reproduces it byte for byte.

def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value) + 0.0  # normalizes -0.0
        if not math.isfinite(v):
            raise ValueError(f"non-finite metric value {value!r}")
        return format(v, ".17g")
    return str(value)


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = (f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    return format_value(value)


def _csv_columns(experiment: str) -> tuple:
    return {
        "exp1": CONVERGENCE_COLUMNS,
        "exp2": SPECTRUM_COLUMNS,
        "exp3": FORECAST_COLUMNS,
    }[experiment]


def render_results(record: ResultRecord, fmt: str = "csv") -> str:
    """Serialize a record to its CSV table or JSON summary text."""
    if fmt == "csv":
        columns = _csv_columns(record.experiment)
        lines = [",".join(columns)]
        for row in record.rows:
            lines.append(",".join(format_value(row[c]) for c in columns))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        summary = {
            "experiment": record.experiment,
            "config": record.params,
            "rows": record.rows,
            "metrics": record.metrics,
        }
        if record.slope is not None:
            summary["loglog_slope"] = record.slope
        return _json_value(summary) + "\n"
    raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def emit_results(record: ResultRecord, path, fmt: str = "csv") -> None:
    """Write the record to ``path``; bit-stable for identical records.

    Raises OSError if the path is not writable.
    """
    Path(path).write_text(render_results(record, fmt), encoding="utf-8")


# ---------------------------------------------------------------------------
# Model and data files for the fit/predict commands.

def read_training_file(path) -> TrainingSet:
    """Parse whitespace-separated `x t y1 y2 ...` records, one per line."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] < 3:
        raise ValueError("data file needs columns: x t y1 [y2 ...]")
    return TrainingSet(x=data[:, 0], t=data[:, 1], y=data[:, 2:])


def read_points_file(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse whitespace-separated `x t` query records, one per line."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError("points file needs columns: x t")
    return data[:, 0], data[:, 1]


def save_model(model: FittedField, path) -> None:
    payload = {
        "kernel": {
            "sigma_x": model.kernel.spatial.bandwidth,
            "sigma_t": model.kernel.temporal.bandwidth,
            "mode": model.kernel.mode,
            "alpha": model.kernel.alpha,
            "output_dim": model.kernel.output_dim,
        },
        "lambda": model.lam,
        "centers_x": model.x[:, 0] if model.x.shape[1] == 1 else model.x,
        "centers_t": model.t,
        "coef": model.coef,
        "targets": model.targets,
        "residual_inf": model.residual_inf,
        "jitter": model.jitter,
    }
    Path(path).write_text(_json_value(payload) + "\n", encoding="utf-8")


def load_model(path) -> FittedField:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    spec = payload["kernel"]
    kernel = OperatorKernel(
        spatial=ScalarKernel(spec["sigma_x"]),
        temporal=ScalarKernel(spec["sigma_t"]),
        mode=spec["mode"],
        alpha=spec["alpha"],
        output_dim=int(spec["output_dim"]),
    )
    x = np.asarray(payload["centers_x"], dtype=float)
    t = np.asarray(payload["centers_t"], dtype=float)
    gram = assemble_block_gram(kernel, x, t)
    return FittedField(
        kernel=kernel,
        x=x.reshape(-1, 1) if x.ndim == 1 else x,
        t=t,
        coef=np.asarray(payload["coef"], dtype=float),
        lam=float(payload["lambda"]),
        targets=np.asarray(payload["targets"], dtype=float),
        gram=gram,
        residual_inf=float(payload["residual_inf"]),
        jitter=float(payload["jitter"]),
    )
