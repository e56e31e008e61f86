"""Command-line front end: single runs, training runs, and accuracy sweeps.

Exit codes: 0 on success, 1 when a run fails numerically (divergence,
non-finite values) or an input artifact cannot be ingested, 2 for usage
errors in the command line itself.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import FgdConfig
from .data import Dataset, IngestionError, UnsupportedImageFormat, load_image_folder, synth_dataset
from .functions import (
    DOUBLEWELL_GLOBAL_MIN,
    DOUBLEWELL_SHALLOW_BASIN,
    make_test_functions,
)
from .nn.checkpoint import save_checkpoint
from .nn.network import NetworkArchitecture
from .nn.training import RunMetrics, run_training
from .optimizer import DivergenceError, NumericError, run_to_convergence

ESCAPE_RADIUS = 0.3
THREADS_ENV = "FRACGRAD_THREADS"


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# argparse type helpers; raising ValueError here turns into a usage error (2).

def _alpha_type(text: str) -> float:
    value = float(text)
    if not (0.0 < value <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {value}")
    return value


def _terms_type(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"M must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0.0:
        raise ValueError(f"must be positive, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise ValueError(f"must be >= 0, got {value}")
    return value


def _momentum_type(text: str) -> float:
    value = float(text)
    if not (0.0 <= value < 1.0):
        raise ValueError(f"momentum must lie in [0, 1), got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"must be >= 1, got {value}")
    return value


def _float_list(text: str) -> list[float]:
    values = [float(t) for t in text.split(",") if t.strip()]
    if not values:
        raise ValueError("expected a comma-separated list of numbers")
    return values


def _alpha_list(text: str) -> list[float]:
    values = _float_list(text)
    for v in values:
        if not (0.0 < v <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {v}")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise ValueError(f"expected a comma-separated list of integers: {e}") from e
    if not values:
        raise ValueError("expected a comma-separated list of integers")
    return values


def _terms_list(text: str) -> list[int]:
    values = _int_list(text)
    for v in values:
        if v < 1:
            raise ValueError(f"M must be >= 1, got {v}")
    return values


def _dataset_spec(text: str) -> tuple:
    """Validate the --dataset grammar; actual loading happens later.

    Forms: ``synth:N``, ``synth:N:NOISE``, ``folder:ROOT:MANIFEST``,
    ``folder:ROOT:MANIFEST:SIZE``.
    """
    parts = text.split(":")
    if parts[0] == "synth":
        if len(parts) == 2:
            return ("synth", int(parts[1]), 0.1)
        if len(parts) == 3:
            return ("synth", int(parts[1]), float(parts[2]))
        raise ValueError("synth dataset takes synth:N or synth:N:NOISE")
    if parts[0] == "folder":
        if len(parts) == 3:
            return ("folder", parts[1], parts[2], 16)
        if len(parts) == 4:
            return ("folder", parts[1], parts[2], int(parts[3]))
        raise ValueError("folder dataset takes folder:ROOT:MANIFEST or folder:ROOT:MANIFEST:SIZE")
    raise ValueError(f"unknown dataset kind {parts[0]!r}; use synth:... or folder:...")


def _net_spec(text: str) -> tuple[tuple[int, ...], int]:
    """``toy`` or ``vgg:C1,C2,...:HIDDEN`` -> (conv channels, hidden units)."""
    if text == "toy":
        return ((8, 16), 32)
    parts = text.split(":")
    if parts[0] == "vgg" and len(parts) == 3:
        channels = tuple(_int_list(parts[1]))
        hidden = int(parts[2])
        if hidden < 1 or any(c < 1 for c in channels):
            raise ValueError("channel and hidden sizes must be >= 1")
        return (channels, hidden)
    raise ValueError(f"unknown net {text!r}; use toy or vgg:C1,C2:HIDDEN")


def _load_dataset(spec: tuple) -> Dataset:
    if spec[0] == "synth":
        return synth_dataset(spec[1], seed=0, noise=spec[2])
    _, root, manifest, size = spec
    return load_image_folder(root, manifest, image_size=size)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_alpha_type, default=0.9, help="fractional order in (0, 1]")
    p.add_argument("--M", type=_terms_type, default=1, help="series terms kept (>= 1)")
    p.add_argument("--mu", type=_positive_float, default=0.1, help="learning rate")
    p.add_argument("--phi", type=_nonneg_float, default=1e-8, help="offset added to the memory step")
    p.add_argument(
        "--momentum", type=_momentum_type, default=0.0, help="velocity factor in [0, 1)"
    )
    p.add_argument(
        "--gradient-point",
        choices=("current", "previous"),
        default="current",
        help="where derivatives are evaluated",
    )


def _config_from_args(args) -> FgdConfig:
    return FgdConfig(
        alpha=args.alpha,
        n_terms=args.M,
        learning_rate=args.mu,
        phi=args.phi,
        gradient_point=args.gradient_point,
        momentum=args.momentum,
    )


def _config_dict(cfg: FgdConfig) -> dict:
    return {
        "alpha": cfg.alpha,
        "n_terms": cfg.n_terms,
        "learning_rate": cfg.learning_rate,
        "phi": cfg.phi,
        "gradient_point": cfg.gradient_point,
        "momentum": cfg.momentum,
    }


def cmd_optimize(args) -> int:
    cfg = _config_from_args(args)
    catalog = make_test_functions()
    f = catalog[args.fn]
    rng = np.random.default_rng(args.seed)
    if args.x0 is not None:
        start = np.asarray(args.x0, dtype=np.float64)
        if start.shape != (f.dimension,):
            print(
                f"error: {args.fn} expects {f.dimension} start coordinates, got {start.size}",
                file=sys.stderr,
            )
            return 1
    elif f.name == "doublewell":
        start = rng.uniform(*DOUBLEWELL_SHALLOW_BASIN, size=1)
    else:
        start = f.default_start

    traj = run_to_convergence(f, start, cfg, tol=args.tol, max_iter=args.max_iter)
    final = traj.final_point
    escaped = None
    if f.name == "doublewell":
        escaped = bool(abs(float(final[0]) - DOUBLEWELL_GLOBAL_MIN) < ESCAPE_RADIUS)
    distance = None
    if f.true_minimum is not None:
        distance = float(np.linalg.norm(final - f.true_minimum))
    summary = {
        "function": f.name,
        "config": _config_dict(cfg),
        "seed": args.seed,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "start": [float(v) for v in start],
        "iterations": traj.iterations[-1],
        "converged": traj.converged,
        "reason": traj.reason,
        "final_point": [float(v) for v in final],
        "final_value": traj.values[-1],
        "final_gradient_norm": traj.gradient_norms[-1],
        "distance_to_minimum": distance,
        "basin_escaped": escaped,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        import io

        buf = io.StringIO()
        traj.write_csv(buf)
        _atomic_write_text(out / "trajectory.csv", buf.getvalue())
        _write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _metrics_filename(alpha: float, n_terms: int, seed: int) -> str:
    return f"metrics_alpha{alpha:g}_M{n_terms}_seed{seed}.csv"


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    dataset = _load_dataset(args.dataset)
    channels, hidden = args.net
    arch = NetworkArchitecture(
        image_size=int(dataset.train.images.shape[1]),
        conv_channels=channels,
        hidden_units=hidden,
    )
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    runs: list[RunMetrics] = []
    for idx, seed in enumerate(args.seeds):
        network, metrics = run_training(
            dataset,
            cfg,
            epochs=args.epochs,
            batch_size=args.batch,
            seed=seed,
            arch=arch,
            standard_bce=args.standard_bce,
            eval_every=args.eval_every,
        )
        runs.append(metrics)
        if out:
            import io

            buf = io.StringIO()
            metrics.write_csv(buf)
            _atomic_write_text(
                out / _metrics_filename(cfg.alpha, cfg.n_terms, seed), buf.getvalue()
            )
        if idx == 0 and args.save_model:
            save_checkpoint(network, args.save_model, arch=arch)
    if not all(
        np.isfinite([m.final_train_accuracy, m.final_test_accuracy]).all() for m in runs
    ):
        print("error: a run produced non-finite final metrics", file=sys.stderr)
        return 1

    timed = runs[1:] if len(runs) > 1 else runs
    summary = {
        "dataset": dataset.name,
        "config": _config_dict(cfg),
        "epochs": args.epochs,
        "batch_size": args.batch,
        "seeds": list(args.seeds),
        "standard_bce": args.standard_bce,
        "architecture": arch.to_dict(),
        "runs": [m.summary_dict() for m in runs],
        "mean_final_train_accuracy": float(np.mean([m.final_train_accuracy for m in runs])),
        "mean_final_test_accuracy": float(np.mean([m.final_test_accuracy for m in runs])),
        "mean_elapsed_seconds": float(np.mean([m.elapsed_seconds for m in timed])),
        "timing_excludes_first_run": len(runs) > 1,
    }
    if out:
        _write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    dataset = _load_dataset(args.dataset)
    channels, hidden = args.net
    arch = NetworkArchitecture(
        image_size=int(dataset.train.images.shape[1]),
        conv_channels=channels,
        hidden_units=hidden,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def run_cell(alpha: float, n_terms: int) -> list[dict]:
        cfg = FgdConfig(
            alpha=alpha,
            n_terms=n_terms,
            learning_rate=args.mu,
            phi=args.phi,
            gradient_point=args.gradient_point,
            momentum=args.momentum,
        )
        rows = []
        for seed in args.seeds:
            row = {"alpha": alpha, "n_terms": n_terms, "seed": seed}
            try:
                _, metrics = run_training(
                    dataset,
                    cfg,
                    epochs=args.epochs,
                    batch_size=args.batch,
                    seed=seed,
                    arch=arch,
                    standard_bce=args.standard_bce,
                    eval_every=args.eval_every,
                )
                finite = np.isfinite(
                    [metrics.final_train_accuracy, metrics.final_test_accuracy]
                ).all()
                row.update(
                    final_train_accuracy=metrics.final_train_accuracy,
                    final_test_accuracy=metrics.final_test_accuracy,
                    elapsed_seconds=metrics.elapsed_seconds,
                    status="ok" if finite else "non-finite metrics",
                )
            except (NumericError, DivergenceError, FloatingPointError) as e:
                row.update(
                    final_train_accuracy=float("nan"),
                    final_test_accuracy=float("nan"),
                    elapsed_seconds=float("nan"),
                    status=f"failed: {e}",
                )
            rows.append(row)
        return rows

    workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
    cells = [(a, m) for m in args.Ms for a in args.alphas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        cell_rows = list(pool.map(lambda c: run_cell(*c), cells))
    rows = [row for chunk in cell_rows for row in chunk]

    long_cols = [
        "alpha",
        "n_terms",
        "seed",
        "final_train_accuracy",
        "final_test_accuracy",
        "elapsed_seconds",
        "status",
    ]
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(long_cols)
    for row in rows:
        writer.writerow(
            [
                repr(row["alpha"]),
                row["n_terms"],
                row["seed"],
                repr(row["final_train_accuracy"]),
                repr(row["final_test_accuracy"]),
                repr(row["elapsed_seconds"]),
                row["status"],
            ]
        )
    _atomic_write_text(out / "long.csv", buf.getvalue())

    def cell_mean(alpha: float, n_terms: int, key: str) -> float:
        vals = [
            row[key] for row in rows if row["alpha"] == alpha and row["n_terms"] == n_terms
        ]
        return float(np.mean(vals))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["panel", "M"] + [f"alpha_{a:g}" for a in args.alphas])
    for panel, key in (("train", "final_train_accuracy"), ("test", "final_test_accuracy")):
        for m in args.Ms:
            writer.writerow(
                [panel, m] + [repr(cell_mean(a, m, key)) for a in args.alphas]
            )
    _atomic_write_text(out / "matrix.csv", buf.getvalue())

    failures = [row for row in rows if row["status"] != "ok"]
    summary = {
        "dataset": dataset.name,
        "alphas": list(args.alphas),
        "Ms": list(args.Ms),
        "seeds": list(args.seeds),
        "epochs": args.epochs,
        "batch_size": args.batch,
        "learning_rate": args.mu,
        "phi": args.phi,
        "gradient_point": args.gradient_point,
        "momentum": args.momentum,
        "standard_bce": args.standard_bce,
        "architecture": arch.to_dict(),
        "workers": workers,
        "n_runs": len(rows),
        "n_failures": len(failures),
        "mean_test_accuracy": {
            f"alpha{a:g}_M{m}": cell_mean(a, m, "final_test_accuracy")
            for a, m in cells
        },
    }
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if not failures else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgrad",
        description="Fractional-order gradient descent runs, CNN training, and sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="minimize a catalog function")
    _add_config_flags(p_opt)
    p_opt.add_argument("--fn", required=True, choices=sorted(make_test_functions().keys()))
    p_opt.add_argument(
        "--x0", type=_float_list, default=None, help="start coordinates, comma-separated"
    )
    p_opt.add_argument("--tol", type=_nonneg_float, default=1e-6)
    p_opt.add_argument("--max-iter", type=_positive_int, default=5000)
    p_opt.add_argument("--seed", type=int, default=0, help="seeds the double-well start draw")
    p_opt.add_argument("--out", default=None, help="directory for trajectory.csv and summary.json")
    p_opt.set_defaults(func=cmd_optimize)

    p_train = sub.add_parser("train", help="train the small CNN with fractional updates")
    _add_config_flags(p_train)
    p_train.add_argument("--dataset", type=_dataset_spec, required=True)
    p_train.add_argument("--net", type=_net_spec, default=_net_spec("toy"))
    p_train.add_argument("--epochs", type=_positive_int, default=6)
    p_train.add_argument("--batch", type=_positive_int, default=10)
    p_train.add_argument("--seeds", type=_int_list, default=[0])
    p_train.add_argument("--eval-every", type=_positive_int, default=1)
    p_train.add_argument(
        "--standard-bce",
        action="store_true",
        help="use the two-sided cross-entropy instead of the target-node form",
    )
    p_train.add_argument("--save-model", default=None, help="checkpoint file for the first seed")
    p_train.add_argument("--out", default=None, help="directory for metrics CSVs and summary.json")
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("sweep", help="grid over alpha and M with repeats")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--alphas", type=_alpha_list, default=[0.7, 0.9, 1.0])
    p_sweep.add_argument("--Ms", type=_terms_list, default=[1, 2, 3, 4])
    p_sweep.add_argument("--dataset", type=_dataset_spec, required=True)
    p_sweep.add_argument("--net", type=_net_spec, default=_net_spec("toy"))
    p_sweep.add_argument("--epochs", type=_positive_int, default=6)
    p_sweep.add_argument("--batch", type=_positive_int, default=10)
    p_sweep.add_argument("--seeds", type=_int_list, default=[0])
    p_sweep.add_argument("--eval-every", type=_positive_int, default=1)
    p_sweep.add_argument("--standard-bce", action="store_true")
    p_sweep.add_argument("--out", required=True, help="directory for long.csv, matrix.csv, summary.json")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NumericError, DivergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (IngestionError, UnsupportedImageFormat) as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e, IngestionError):
            for line_no, name, problem in e.rows:
                print(f"  line {line_no}: {name}: {problem}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
