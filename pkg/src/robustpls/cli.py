"""Command-line interface: synth, fit, predict, bench.

Hyperparameters resolve in order: built-in defaults, then a JSON config
file given with --config, then explicit flags. The RPLS_LOG environment
variable (off|info|trace) controls diagnostic verbosity on stderr.
Every run seeded with --seed is bit-reproducible in its output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, datagen, evaluate, projection, rpls
from .errors import RplsError
from .io import DatasetFile, format_float, load_csv, load_model, save_model, write_csv

CLI_METHODS = {
    "mlr": "MLR",
    "pcr": "PCR",
    "plsr": "PLSR",
    "pls-proj": "PLS_PROJ",
    "rpls": "RPLS_PROJ",
}

HYPER_KEYS = ("k", "lambda1", "lambda2", "rho", "alpha0", "alpha_max", "tol", "max_iter", "center")


def _setup_logging():
    level = {"off": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}.get(
        os.environ.get("RPLS_LOG", "off").lower(), logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _add_hyper_flags(p):
    p.add_argument("--k", type=int, default=None, help="latent dimension (default 5)")
    p.add_argument("--lambda1", type=float, default=None, help="nuclear-norm weight, X side")
    p.add_argument("--lambda2", type=float, default=None, help="nuclear-norm weight, Y side")
    p.add_argument("--rho", type=float, default=None, help="penalty growth factor")
    p.add_argument("--alpha0", type=float, default=None, help="initial penalty for both constraints")
    p.add_argument("--alpha-max", type=float, default=None, dest="alpha_max", help="penalty cap")
    p.add_argument("--tol", type=float, default=None, help="convergence threshold")
    p.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    p.add_argument("--center", choices=rpls.CENTER_MODES, default=None,
                   help="column centering for the robust solver (default median)")
    p.add_argument("--config", default=None, help="JSON file with hyperparameter defaults")


def _add_outlier_flags(p):
    p.add_argument("--outliers", choices=["none", "sparse", "lowtail"], default="none")
    p.add_argument("--outlier-fraction", type=float, default=0.02)
    p.add_argument("--outlier-magnitude", type=float, default=10.0)
    p.add_argument("--tail-fraction", type=float, default=0.10)
    p.add_argument("--tail-multiplier", type=float, default=10.0)


def _resolve_hypers(args):
    """defaults < --config file < explicit flags."""
    merged = {"k": 5, "lambda1": None, "lambda2": None, "rho": 1.1, "alpha0": 1.0,
              "alpha_max": 1e6, "tol": None, "max_iter": 500, "center": "median"}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise RplsError(f"unknown keys in config file: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in HYPER_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _rpls_config(h) -> rpls.RplsConfig:
    return rpls.RplsConfig(
        k=int(h["k"]),
        lambda1=h["lambda1"],
        lambda2=h["lambda2"],
        alpha1_0=float(h["alpha0"]),
        alpha2_0=float(h["alpha0"]),
        rho=float(h["rho"]),
        alpha_max=float(h["alpha_max"]),
        tol=h["tol"],
        max_iter=int(h["max_iter"]),
        center=h["center"],
    )


def _outlier_spec(args, seed):
    kind = datagen.SPARSE_RANDOM if args.outliers == "sparse" else datagen.LOW_TAIL
    return datagen.OutlierSpec(
        kind=kind,
        fraction=args.outlier_fraction,
        magnitude=args.outlier_magnitude,
        tail_fraction=args.tail_fraction,
        tail_multiplier=args.tail_multiplier,
        seed=seed,
    )


def _load_xy(args):
    x = load_csv(DatasetFile(args.x, has_header=args.has_header))
    y = load_csv(DatasetFile(args.y, has_header=args.has_header))
    return x, y


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = datagen.SynthSpec(
        n=args.n, p=args.p, r=args.r, k_true=args.k, n_collinear=args.n_collinear,
        noise_sigma=args.noise_sigma, seed=args.seed,
    )
    x, y, truth = datagen.generate(spec)
    if args.outliers != "none":
        ospec = _outlier_spec(args, args.seed)
        write_csv(out / "x_clean.csv", x)
        write_csv(out / "y_clean.csv", y)
        if args.outliers == "sparse":
            x, y, mask = datagen.inject_sparse(x, y, ospec)
            write_csv(out / "mask_x.csv", mask.x.astype(float))
        else:
            y, mask = datagen.inject_low_tail(y, ospec)
        write_csv(out / "mask_y.csv", mask.y.astype(float))
    write_csv(out / "x.csv", x)
    write_csv(out / "y.csv", y)
    write_csv(out / "truth_scores.csv", truth.q_true)
    write_csv(out / "truth_loadings.csv", truth.loadings)
    write_csv(out / "truth_theta.csv", truth.theta_true)
    print(f"wrote synthetic dataset ({spec.n}x{spec.p} predictors, {spec.r} responses) to {out}")
    return 0


def cmd_fit(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x, y = _load_xy(args)
    h = _resolve_hypers(args)
    k = int(h["k"])
    if args.method == "rpls":
        model = rpls.fit(x, y, _rpls_config(h))
        write_csv(
            out / "residual_trace.csv",
            np.array(model.residual_trace, dtype=np.float64),
            header=["iteration", "primal_residual"],
        )
        if not model.converged:
            print(f"warning: not converged within {model.config.max_iter} iterations", file=sys.stderr)
    elif args.method == "mlr":
        model = baselines.fit_mlr(x, y)
    elif args.method == "pcr":
        model = baselines.fit_pcr(x, y, k)
    elif args.method == "plsr":
        _, model = baselines.fit_pls_nipals(x, y, k)
    elif args.method == "pls-proj":
        factors, linear = baselines.fit_pls_nipals(x, y, k)
        model = projection.from_pls(factors, linear.x_means, linear.y_means)
    else:  # argparse choices prevent this
        raise RplsError(f"unknown method {args.method!r}")
    save_model(out / "model.json", model)
    print(f"wrote {out / 'model.json'}")
    return 0


def cmd_predict(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = load_model(args.model)
    x_new = load_csv(DatasetFile(args.x, has_header=args.has_header))
    if isinstance(model, rpls.RplsModel):
        reg = projection.from_rpls(model)
        y_hat = projection.predict_projection(reg, x_new)
    elif isinstance(model, projection.ProjectionRegressor):
        y_hat = projection.predict_projection(model, x_new)
    else:
        y_hat = baselines.predict(model, x_new)
    write_csv(out / "predictions.csv", y_hat)
    print(f"wrote {out / 'predictions.csv'}")
    return 0


def _write_bench_outputs(out, report, y_test):
    tags = [t for t in report.results]
    r = y_test.shape[1]
    header = ["row"]
    header += [f"TRUE_{j+1}" for j in range(r)]
    for tag in tags:
        header += [f"{tag}_{j+1}" for j in range(r)]
    lines = [",".join(header)]
    for i in range(y_test.shape[0]):
        cells = [str(i)] + [format_float(v) for v in y_test[i]]
        for tag in tags:
            res = report.results[tag]
            if res.predictions is not None:
                cells += [format_float(v) for v in res.predictions[i]]
            else:
                cells += [""] * r
        lines.append(",".join(cells))
    nmse_cells = ["NMSE"] + [""] * r
    for tag in tags:
        res = report.results[tag]
        nmse_cells += [format_float(res.nmse) if res.nmse is not None else ""] * r
    lines.append(",".join(nmse_cells))
    (out / "report.csv").write_text("\n".join(lines) + "\n")

    doc = {
        "dataset_tag": report.dataset_tag,
        "train_indices": report.train_indices.tolist(),
        "test_indices": report.test_indices.tolist(),
        "methods": {
            tag: {"nmse": res.nmse, "error": res.error} for tag, res in report.results.items()
        },
    }
    (out / "report.json").write_text(json.dumps(doc, indent=1) + "\n")

    for tag, res in report.results.items():
        name = tag.lower()
        if res.predictions is not None:
            write_csv(out / f"predictions_{name}.csv", res.predictions)
        if res.scores is not None and res.scores.shape[1] >= 2:
            scores_2d = res.scores[:, :2]
            write_csv(out / f"scores_{name}.csv", scores_2d, header=["score_1", "score_2"])
            try:
                ell = evaluate.confidence_ellipse(scores_2d, coverage=0.95)
                write_csv(
                    out / f"ellipse_{name}.csv",
                    np.array([[ell.center[0], ell.center[1], ell.semi_axes[0], ell.semi_axes[1], ell.rotation_angle]]),
                    header=["center_1", "center_2", "semi_major", "semi_minor", "angle_radians"],
                )
            except RplsError as exc:
                print(f"warning: no ellipse for {name}: {exc}", file=sys.stderr)


def cmd_bench(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x, y = _load_xy(args)
    n = x.shape[0]
    if not 0.0 < args.split < 1.0:
        raise RplsError(f"--split must be in (0, 1), got {args.split}")
    method_keys = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in method_keys if m not in CLI_METHODS]
    if bad:
        raise RplsError(f"unknown methods: {bad}; valid: {sorted(CLI_METHODS)}")
    tags = [CLI_METHODS[m] for m in method_keys]

    perm = datagen.rng_from_seed(args.seed).permutation(n)
    n_train = int(round(args.split * n))
    if n_train < 1 or n_train >= n:
        raise RplsError(f"--split {args.split} leaves an empty train or test set for {n} rows")
    train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])

    if args.outliers != "none":
        ospec = _outlier_spec(args, args.seed)
        if args.outliers == "sparse":
            x_tr, y_tr, _ = datagen.inject_sparse(x[train], y[train], ospec)
            x = x.copy()
            x[train] = x_tr
        else:
            y_tr, _ = datagen.inject_low_tail(y[train], ospec)
        y = y.copy()
        y[train] = y_tr

    h = _resolve_hypers(args)
    report = evaluate.run_experiment(
        x, y, (train, test), tags, k=int(h["k"]), rpls_config=_rpls_config(h),
        dataset_tag=Path(args.x).name,
    )
    _write_bench_outputs(out, report, y[test])
    for tag in tags:
        res = report.results[tag]
        status = f"nmse={format_float(res.nmse)}" if res.nmse is not None else f"failed: {res.error}"
        print(f"{tag}: {status}")
    print(f"report written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpls",
        description="Outlier-robust PLS and classical baselines: data synthesis, fitting, prediction, benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset (optionally corrupted)")
    p_synth.add_argument("--n", type=int, default=150)
    p_synth.add_argument("--p", type=int, default=40)
    p_synth.add_argument("--r", type=int, default=4)
    p_synth.add_argument("--k", type=int, default=5, help="true latent dimension")
    p_synth.add_argument("--n-collinear", type=int, default=10)
    p_synth.add_argument("--noise-sigma", type=float, default=0.01)
    p_synth.add_argument("--seed", type=int, default=0)
    _add_outlier_flags(p_synth)
    p_synth.add_argument("--out-dir", required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_fit = sub.add_parser("fit", help="fit one method and write model.json")
    p_fit.add_argument("--x", required=True)
    p_fit.add_argument("--y", required=True)
    p_fit.add_argument("--method", required=True, choices=sorted(CLI_METHODS))
    p_fit.add_argument("--has-header", action="store_true")
    _add_hyper_flags(p_fit)
    p_fit.add_argument("--out-dir", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="apply a saved model to new predictors")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--x", required=True)
    p_pred.add_argument("--has-header", action="store_true")
    p_pred.add_argument("--out-dir", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_bench = sub.add_parser("bench", help="train/test comparison of several methods")
    p_bench.add_argument("--x", required=True)
    p_bench.add_argument("--y", required=True)
    p_bench.add_argument("--methods", default="mlr,pcr,plsr,pls-proj,rpls")
    p_bench.add_argument("--split", type=float, default=0.8, help="train fraction")
    p_bench.add_argument("--seed", type=int, default=0, help="split shuffle / outlier seed")
    p_bench.add_argument("--has-header", action="store_true")
    _add_outlier_flags(p_bench)
    _add_hyper_flags(p_bench)
    p_bench.add_argument("--out-dir", required=True)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RplsError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
