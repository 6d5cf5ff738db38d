"""Command line interface.

    stovk exp1|exp2|exp3 [--n 16,64,256,1024] [--lambda 1e-8 | --lambda-schedule r=1]
                         [--sigma-x 0.3] [--sigma-t 0.3] [--alpha 0.5]
                         [--kernel separable|time-aligned] [--sampler uniform|halton]
                         [--noise-std 0.0] [--dt 0.05] [--horizon 40]
                         [--ranks 1,2,4,8,16] [--seed 42] [--quad-res 64]
                         [--pinv-tol 1e-10] [--out PATH] [--format csv|json] [--no-timing]
    stovk fit --data PATH --out MODEL
    stovk predict --model MODEL --points PATH [--out PATH]
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    EXPERIMENTS,
    default_config,
    emit_results,
    load_model,
    read_points_file,
    read_training_file,
    run_experiment,
    save_model,
    format_value,
)
from .kernels import SEPARABLE, TIME_ALIGNED, OperatorKernel, ScalarKernel
from .ovkr import RidgeConfig, fit, predict_batch

DEFAULT_OUTPUT = {"exp1": "convergence", "exp2": "spectrum", "exp3": "forecast"}


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _schedule_r(text: str) -> float:
    value = text.split("=", 1)[1] if "=" in text else text
    try:
        return float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected r=<number>, got {text!r}") from exc


def _add_kernel_flags(parser, sigma_x: float, sigma_t: float) -> None:
    parser.add_argument("--sigma-x", type=float, default=sigma_x, help="spatial bandwidth")
    parser.add_argument("--sigma-t", type=float, default=sigma_t, help="temporal bandwidth")
    parser.add_argument("--alpha", type=float, default=0.5, help="derivative-alignment weight")
    parser.add_argument(
        "--kernel", choices=(SEPARABLE, TIME_ALIGNED), default=SEPARABLE,
        help="operator kernel mode",
    )
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="fixed regularization strength")


def _add_experiment_parser(subparsers, name: str) -> None:
    base = default_config(name)
    parser = subparsers.add_parser(name, help=f"run experiment {name[-1]}")
    parser.add_argument("--n", type=_int_list, default=base.n_values,
                        help="comma-separated sample counts")
    _add_kernel_flags(parser, base.sigma_x, base.sigma_t)
    parser.add_argument("--lambda-schedule", type=_schedule_r, default=None, metavar="r=R",
                        help="use lambda = N^(-1/(2r+1)) instead of a fixed lambda")
    parser.add_argument("--sampler", choices=("uniform", "halton"), default=base.sampler)
    parser.add_argument("--noise-std", type=float, default=base.noise_std)
    parser.add_argument("--dt", type=float, default=base.dt)
    parser.add_argument("--horizon", type=int, default=base.horizon)
    parser.add_argument("--ranks", type=_int_list, default=base.ranks)
    parser.add_argument("--seed", type=int, default=base.seed)
    parser.add_argument("--quad-res", type=int, default=base.quad_res)
    parser.add_argument("--pinv-tol", type=float, default=base.pinv_tol)
    parser.add_argument("--out", default=None, help="output path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--no-timing", action="store_true",
                        help="write runtime_ms as 0 so outputs are byte-reproducible")


def _run_experiment_command(args) -> int:
    cfg = default_config(
        args.command,
        n_values=args.n,
        lam=args.lam if args.lam is not None else default_config(args.command).lam,
        lam_schedule_r=args.lambda_schedule,
        sigma_x=args.sigma_x,
        sigma_t=args.sigma_t,
        alpha=args.alpha,
        kernel_mode=args.kernel,
        sampler=args.sampler,
        noise_std=args.noise_std,
        dt=args.dt,
        horizon=args.horizon,
        ranks=args.ranks,
        seed=args.seed,
        quad_res=args.quad_res,
        pinv_tol=args.pinv_tol,
        timing=not args.no_timing,
    )
    record = run_experiment(cfg)
    out = args.out or f"{DEFAULT_OUTPUT[args.command]}.{args.format}"
    emit_results(record, out, args.format)
    summary = f"{cfg.experiment}: wrote {len(record.rows)} rows to {out}"
    if record.slope is not None:
        summary += f" (log-log slope {record.slope:.3f})"
    print(summary)
    return 0


def _run_fit(args) -> int:
    data = read_training_file(args.data)
    kernel = OperatorKernel(
        spatial=ScalarKernel(args.sigma_x),
        temporal=ScalarKernel(args.sigma_t),
        mode=args.kernel,
        alpha=args.alpha,
        output_dim=data.output_dim,
    )
    lam = args.lam if args.lam is not None else 1e-6
    model = fit(data, RidgeConfig(lam, kernel))
    save_model(model, args.out)
    print(f"fit {len(data)} samples (lambda {lam:g}, residual {model.residual_inf:.3e}) -> {args.out}")
    return 0


def _run_predict(args) -> int:
    model = load_model(args.model)
    x, t = read_points_file(args.points)
    values = predict_batch(model, x, t)
    lines = [
        " ".join([format_value(float(xi)), format_value(float(ti))] + [format_value(float(v)) for v in row])
        for xi, ti, row in zip(x, t, values)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {len(lines)} predictions to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stovk",
        description="Operator-valued kernel regression and Koopman forecasting experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_experiment_parser(subparsers, name)

    fit_parser = subparsers.add_parser("fit", help="fit a field to a data file")
    fit_parser.add_argument("--data", required=True, help="input file: `x t y1 y2 ...` per line")
    fit_parser.add_argument("--out", required=True, help="model output path")
    _add_kernel_flags(fit_parser, 0.3, 0.3)

    predict_parser = subparsers.add_parser("predict", help="evaluate a fitted model")
    predict_parser.add_argument("--model", required=True, help="model path from `stovk fit`")
    predict_parser.add_argument("--points", required=True, help="query file: `x t` per line")
    predict_parser.add_argument("--out", default=None, help="output path (default: stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in EXPERIMENTS:
        return _run_experiment_command(args)
    if args.command == "fit":
        return _run_fit(args)
    return _run_predict(args)


if __name__ == "__main__":
    raise SystemExit(main())
