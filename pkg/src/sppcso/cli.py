"""Command-line interface: ``sppcso {simulate,fit,cv,path,benchmark,genes}``.

Settings resolve as command-line flags over ``--config`` file values over
built-in defaults. Every run writes ``manifest.json`` next to its outputs; the
manifest is itself a valid ``--config`` file that reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BENCH_METHODS, CVSettings, Scenario, run_benchmark
from .errors import SppcsoError
from .estimator import DEFAULT_GRAM_SCALE, GRAM_SCALES
from .genes import filter_probes, load_expression, run_gene_experiment, top_variance
from .linalg import Dataset, standardize
from .methods import METHODS, fit_method, fit_path
from .selection import cross_validate
from .solvers import lambda_path
from .tables import read_matrix, read_vector, write_csv

COMMON = {"seed": 0, "threads": None, "out_dir": ".", "delimiter": None}
CV_KEYS = {"folds": 5, "n_lambda": 50, "min_ratio": 0.01, "thetas": None,
           "gram_scale": DEFAULT_GRAM_SCALE, "gamma": None, "alpha": None, "tol": 1e-4}
DEFAULTS = {
    "simulate": {"scenario": "example1", "n": 200, "p": 600, "sigma": 1.0, "rho": 0.5,
                 "background": "ar1"},
    "fit": {"x": None, "y": None, "method": "lasso", "lam": None, "theta": None, "gamma": None,
            "alpha": None, "gram_scale": DEFAULT_GRAM_SCALE, "tol": 1e-4, "max_iter": 10_000},
    "cv": {"x": None, "y": None, "method": "lasso", "lambdas": None, "refit": False, **CV_KEYS},
    "path": {"x": None, "y": None, "method": "lasso", "theta": None, "lambdas": None,
             "n_lambda": 50, "min_ratio": 0.01, "gram_scale": DEFAULT_GRAM_SCALE,
             "gamma": None, "alpha": None, "tol": 1e-4},
    "benchmark": {"methods": ["lasso", "sppcso"], "scenario": "example1", "n": 200, "p": 600,
                  "params": [0.5, 1.0, 2.0], "background": "ar1", "reps": 100, **CV_KEYS},
    "genes": {"expr": None, "target": None, "methods": ["lasso", "sppcso"], "reps": 100,
              "n_train": 60, "max_quantile": 0.25, "fold_change": 2.0, "top_k": 3000,
              "spread_fallback": False, "resample_test": False, **CV_KEYS},
}
REQUIRED = {"fit": ("x", "y", "lam"), "cv": ("x", "y"), "path": ("x", "y"),
            "genes": ("expr", "target")}
FLAG_NAMES = {"lam": "--lambda", "x": "--x", "y": "--y", "expr": "--expr", "target": "--target",
              "theta": "--theta"}


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _flag(parser, *names, **kw):
    parser.add_argument(*names, default=argparse.SUPPRESS, **kw)


def _cv_flags(p):
    _flag(p, "--folds", type=int, help="number of CV folds (default 5)")
    _flag(p, "--n-lambda", dest="n_lambda", type=int, help="lambda grid size (default 50)")
    _flag(p, "--min-ratio", dest="min_ratio", type=float,
          help="smallest lambda as a fraction of lambda_max (default 0.01)")
    _flag(p, "--thetas", type=_floats, help="comma-separated theta grid (default 0.1..0.9)")
    _flag(p, "--gram-scale", dest="gram_scale", choices=GRAM_SCALES,
          help="eigenvalues of X_S'X_S ('raw') or X_S'X_S/n ('n')")
    _flag(p, "--gamma", type=float, help="MCP/SCAD/Mnet concavity")
    _flag(p, "--alpha", type=float, help="Enet/Mnet L1 share")
    _flag(p, "--tol", type=float, help="coordinate descent tolerance (default 1e-4)")


def _data_flags(p):
    _flag(p, "--x", help="design matrix file (rows = observations)")
    _flag(p, "--y", help="response vector file")
    _flag(p, "--method", choices=METHODS)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _flag(common, "--seed", type=int, help="master random seed (default 0)")
    _flag(common, "--threads", type=int,
          help="worker threads (default $SPPCSO_THREADS or all cores)")
    _flag(common, "--out-dir", dest="out_dir", help="output directory (default .)")
    _flag(common, "--config", dest="config_file", help="JSON config or manifest file")
    _flag(common, "--delimiter", help="input field delimiter (default: auto)")

    parser = argparse.ArgumentParser(prog="sppcso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic dataset")
    _flag(p, "--scenario", choices=("example1", "example2"))
    _flag(p, "--n", type=int)
    _flag(p, "--p", type=int)
    _flag(p, "--sigma", type=float, help="noise level for example1")
    _flag(p, "--rho", type=float, help="background correlation for example2")
    _flag(p, "--background", choices=("ar1", "cs"))

    p = sub.add_parser("fit", parents=[common], help="fit one model")
    _data_flags(p)
    _flag(p, "--lambda", dest="lam", type=float)
    _flag(p, "--theta", type=float)
    _flag(p, "--gamma", type=float)
    _flag(p, "--alpha", type=float)
    _flag(p, "--gram-scale", dest="gram_scale", choices=GRAM_SCALES)
    _flag(p, "--tol", type=float)
    _flag(p, "--max-iter", dest="max_iter", type=int)

    p = sub.add_parser("cv", parents=[common], help="cross-validate over (lambda, theta)")
    _data_flags(p)
    _flag(p, "--lambdas", type=_floats, help="comma-separated lambda grid")
    _flag(p, "--refit", action="store_true", help="refit on all data at the selected pair")
    _cv_flags(p)

    p = sub.add_parser("path", parents=[common], help="warm-started solution path")
    _data_flags(p)
    _flag(p, "--theta", type=float)
    _flag(p, "--lambdas", type=_floats)
    _flag(p, "--n-lambda", dest="n_lambda", type=int)
    _flag(p, "--min-ratio", dest="min_ratio", type=float)
    _flag(p, "--gram-scale", dest="gram_scale", choices=GRAM_SCALES)
    _flag(p, "--gamma", type=float)
    _flag(p, "--alpha", type=float)
    _flag(p, "--tol", type=float)

    p = sub.add_parser("benchmark", parents=[common], help="Monte-Carlo comparison")
    _flag(p, "--methods", type=_names, help=f"comma-separated subset of {', '.join(BENCH_METHODS)}")
    _flag(p, "--scenario", choices=("example1", "example2"))
    _flag(p, "--n", type=int)
    _flag(p, "--p", type=int)
    _flag(p, "--params", type=_floats, help="sigma (example1) or rho (example2) values")
    _flag(p, "--background", choices=("ar1", "cs"))
    _flag(p, "--reps", type=int)
    _cv_flags(p)

    p = sub.add_parser("genes", parents=[common], help="expression-data evaluation")
    _flag(p, "--expr", help="expression matrix file (samples x probes, labelled)")
    _flag(p, "--target", help="probe id of the response")
    _flag(p, "--methods", type=_names, help=f"comma-separated subset of {', '.join(METHODS)}")
    _flag(p, "--reps", type=int)
    _flag(p, "--n-train", dest="n_train", type=int)
    _flag(p, "--max-quantile", dest="max_quantile", type=float)
    _flag(p, "--fold-change", dest="fold_change", type=float)
    _flag(p, "--top-k", dest="top_k", type=int)
    _flag(p, "--spread-fallback", dest="spread_fallback", action="store_true")
    _flag(p, "--resample-test", dest="resample_test", action="store_true")
    _cv_flags(p)
    return parser


def resolve_config(parser, args):
    cmd = args.command
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config_file")}
    from_file = {}
    if "config_file" in vars(args):
        with open(args.config_file, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if "config" in loaded and "command" in loaded:
            if loaded["command"] != cmd:
                parser.error(f"manifest is for '{loaded['command']}', not '{cmd}'")
            loaded = loaded["config"]
        from_file = loaded
    allowed = {**COMMON, **DEFAULTS[cmd]}
    unknown = sorted(set(from_file) - set(allowed))
    if unknown:
        parser.error(f"unknown config keys for '{cmd}': {', '.join(unknown)}")
    cfg = {**allowed, **from_file, **given}
    if cfg["threads"] is None:
        cfg["threads"] = int(os.environ.get("SPPCSO_THREADS") or os.cpu_count() or 1)
    missing = [k for k in REQUIRED.get(cmd, ()) if cfg.get(k) is None]
    if cmd in ("fit", "path") and cfg["method"] == "sppcso" and cfg.get("theta") is None:
        missing.append("theta")
    if missing:
        flags = " ".join(FLAG_NAMES.get(k, "--" + k) for k in missing)
        parser.error(f"{cmd} with method={cfg.get('method', '-')} requires: {flags}")
    for key in ("methods",):
        for m in cfg.get(key) or []:
            valid = BENCH_METHODS if cmd == "benchmark" else METHODS
            if m not in valid:
                parser.error(f"unknown method {m!r}; valid methods: {', '.join(valid)}")
    return cfg


def _out(cfg, name):
    d = Path(cfg["out_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(cmd, cfg):
    _write_json(_out(cfg, "manifest.json"),
                {"command": cmd, "config": cfg, "version": __version__, "seed": cfg["seed"]})


def _load_data(cfg):
    X, _ = read_matrix(cfg["x"], cfg["delimiter"])
    y = read_vector(cfg["y"], cfg["delimiter"])
    return standardize(Dataset(X, y))


def cmd_simulate(cfg):
    sc = Scenario(cfg["scenario"], cfg["n"], cfg["p"],
                  cfg["sigma"] if cfg["scenario"] == "example1" else cfg["rho"], cfg["background"])
    sim = sc.generate(cfg["seed"])
    X, y = sim.raw.X, sim.raw.y
    write_csv(_out(cfg, "X.csv"), [f"x{j}" for j in range(X.shape[1])], X.tolist())
    write_csv(_out(cfg, "y.csv"), ["y"], [[v] for v in y])
    write_csv(_out(cfg, "beta_true.csv"), ["index", "value"], enumerate(sim.beta_true.tolist()))
    return sim


def cmd_fit(cfg):
    data = _load_data(cfg)
    fit = fit_method(data, cfg["method"], cfg["lam"], cfg["theta"], gamma=cfg["gamma"],
                     alpha=cfg["alpha"], gram_scale=cfg["gram_scale"], tol=cfg["tol"],
                     max_iter=cfg["max_iter"])
    raw = data.to_raw_coef(fit.beta)
    write_csv(_out(cfg, "coefficients.csv"), ["index", "value", "raw_value"],
              ((j, fit.beta[j], raw[j]) for j in range(data.p)))
    summary = {"method": cfg["method"], "lambda": cfg["lam"], "theta": cfg["theta"],
               "objective": fit.objective, "iterations": fit.iterations, "nnz": fit.nnz,
               "converged": fit.converged, "reduced_to_lasso": fit.reduced_to_lasso,
               "intercept": data.y_center - float(data.column_centers @ raw)}
    _write_json(_out(cfg, "summary.json"), summary)
    return fit


def cmd_cv(cfg):
    data = _load_data(cfg)
    cv = cross_validate(data, cfg["method"], lambda_grid=cfg["lambdas"],
                        theta_values=cfg["thetas"], k=cfg["folds"], seed=cfg["seed"],
                        n_lambda=cfg["n_lambda"], min_ratio=cfg["min_ratio"], gamma=cfg["gamma"],
                        alpha=cfg["alpha"], gram_scale=cfg["gram_scale"], tol=cfg["tol"],
                        threads=cfg["threads"])
    write_csv(_out(cfg, "cv_curve.csv"), ["lambda", "theta", "mean_mse", "std_mse"], cv.curve())
    best = {"method": cfg["method"], "lambda": cv.best[0], "theta": cv.best[1],
            "mean_mse": float(cv.mean_mse[cv.best_index]),
            "std_mse": float(cv.std_mse[cv.best_index])}
    if cfg["refit"]:
        fit = fit_method(data, cfg["method"], cv.best[0], cv.best[1], gamma=cfg["gamma"],
                         alpha=cfg["alpha"], gram_scale=cfg["gram_scale"], tol=cfg["tol"])
        raw = data.to_raw_coef(fit.beta)
        write_csv(_out(cfg, "coefficients.csv"), ["index", "value", "raw_value"],
                  ((j, fit.beta[j], raw[j]) for j in range(data.p)))
        best["nnz"] = fit.nnz
    _write_json(_out(cfg, "cv_best.json"), best)
    return cv


def cmd_path(cfg):
    data = _load_data(cfg)
    method = cfg["method"]
    if cfg["lambdas"] is not None:
        lambdas = np.sort(np.asarray(cfg["lambdas"], dtype=float))[::-1]
    else:
        a = cfg["alpha"] if cfg["alpha"] is not None else (0.5 if method in ("enet", "mnet") else 1.0)
        lambdas = lambda_path(data, cfg["n_lambda"], cfg["min_ratio"], alpha=a)
    coefs = fit_path(data, method, lambdas, [cfg["theta"]] if method == "sppcso" else None,
                     gamma=cfg["gamma"], alpha=cfg["alpha"], gram_scale=cfg["gram_scale"],
                     tol=cfg["tol"])[:, 0, :]
    rows = [(lam, j, coefs[i, j]) for i, lam in enumerate(lambdas)
            for j in np.flatnonzero(coefs[i])]
    write_csv(_out(cfg, "path.csv"), ["lambda", "index", "value"], rows)
    write_csv(_out(cfg, "path_lambdas.csv"), ["lambda", "nnz"],
              ((lam, int(np.count_nonzero(coefs[i]))) for i, lam in enumerate(lambdas)))
    return lambdas, coefs


def cmd_benchmark(cfg):
    settings = CVSettings(k=cfg["folds"], n_lambda=cfg["n_lambda"], min_ratio=cfg["min_ratio"],
                          thetas=tuple(cfg["thetas"]) if cfg["thetas"] else None,
                          gram_scale=cfg["gram_scale"], gamma=cfg["gamma"], alpha=cfg["alpha"],
                          tol=cfg["tol"])
    report = None
    for param in cfg["params"]:
        sc = Scenario(cfg["scenario"], cfg["n"], cfg["p"], param, cfg["background"])
        r = run_benchmark(cfg["methods"], sc, cfg["reps"], cfg["seed"], cfg["threads"], settings)
        report = r if report is None else report.merge(r)
    with open(_out(cfg, "benchmark.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())
    with open(_out(cfg, "benchmark.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    return report


def cmd_genes(cfg):
    expr, target = load_expression(cfg["expr"], cfg["target"], cfg["delimiter"])
    expr = filter_probes(expr, cfg["max_quantile"], cfg["fold_change"], cfg["spread_fallback"])
    expr = top_variance(expr, min(cfg["top_k"], expr.n_probes))
    report = run_gene_experiment(
        expr, target, cfg["methods"], n_reps=cfg["reps"], seed=cfg["seed"],
        n_train=cfg["n_train"], resample=cfg["resample_test"], k=cfg["folds"],
        n_lambda=cfg["n_lambda"], min_ratio=cfg["min_ratio"], thetas=cfg["thetas"],
        gamma=cfg["gamma"], alpha=cfg["alpha"], gram_scale=cfg["gram_scale"],
        threads=cfg["threads"])
    write_csv(_out(cfg, "genes_summary.csv"), ["method", "mape_train", "mape_test", "nnz"],
              ([r["method"], r["mape_train"], r["mape_test"], r["nnz"]] for r in report.summary))
    cols = ["rep", "method", "lambda", "theta", "mape_train", "mape_test", "nnz"]
    write_csv(_out(cfg, "genes_reps.csv"), cols,
              ([r[c] for c in cols] for r in report.repetitions))
    write_csv(_out(cfg, "probes.csv"), ["probe_id"], ([p] for p in expr.probe_ids))
    return report


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "cv": cmd_cv, "path": cmd_path,
            "benchmark": cmd_benchmark, "genes": cmd_genes}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = resolve_config(parser, args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            COMMANDS[args.command](cfg)
        write_manifest(args.command, cfg)
    except (SppcsoError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
