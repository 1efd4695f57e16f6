"""Monte-Carlo benchmark: simulate, tune by cross-validation, score, aggregate."""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BadDimensions, BenchmarkFailed, SppcsoError
from .estimator import DEFAULT_GRAM_SCALE
from .methods import METHODS, fit_method
from .metrics import estimation_error, prediction_error, selection_metrics
from .selection import DEFAULT_FOLDS, DEFAULT_MIN_RATIO, DEFAULT_N_LAMBDA, cross_validate
from .simulate import gen_example1, gen_example2

log = logging.getLogger(__name__)

BENCH_METHODS = METHODS + ("oracle",)
MAX_FAIL_FRACTION = 0.10
CSV_COLUMNS = ("method", "scenario", "est_err_mean", "est_err_std", "pred_err_mean",
               "pred_err_std", "tpr", "tnr", "tmr", "n_reps", "seed")


@dataclass(frozen=True)
class Scenario:
    example: str
    n: int = 200
    p: int = 600
    param: float = 1.0  # sigma for example1, rho for example2
    background: str = "ar1"

    def __post_init__(self):
        if self.example not in ("example1", "example2"):
            raise BadDimensions(f"unknown scenario {self.example!r}")

    @property
    def label(self):
        key = "sigma" if self.example == "example1" else "rho"
        extra = f",background={self.background}" if self.example == "example2" and self.background != "ar1" else ""
        return f"{self.example}(n={self.n},p={self.p},{key}={self.param:g}{extra})"

    def generate(self, seed):
        if self.example == "example1":
            return gen_example1(self.n, self.p, self.param, seed)
        return gen_example2(self.n, self.p, self.param, seed, background=self.background)


@dataclass(frozen=True)
class CVSettings:
    k: int = DEFAULT_FOLDS
    n_lambda: int = DEFAULT_N_LAMBDA
    min_ratio: float = DEFAULT_MIN_RATIO
    thetas: tuple = None
    gram_scale: str = DEFAULT_GRAM_SCALE
    gamma: float = None
    alpha: float = None
    tol: float = 1e-4


@dataclass
class RepResult:
    method: str
    rep: int
    est_err: float
    pred_err: float
    tpr: float
    tnr: float
    exact: float
    lam: float = None
    theta: float = None
    error: str = None


@dataclass
class BenchmarkReport:
    rows: list
    reps: list = field(default_factory=list)
    n_reps: int = 0
    seed: int = 0

    def row(self, method, scenario=None):
        for r in self.rows:
            if r["method"] == method and (scenario is None or r["scenario"] == scenario):
                return r
        raise KeyError((method, scenario))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"n_reps": self.n_reps, "seed": self.seed, "rows": self.rows,
                           "repetitions": self.reps}, indent=2, allow_nan=True)

    def merge(self, other: "BenchmarkReport") -> "BenchmarkReport":
        return BenchmarkReport(self.rows + other.rows, self.reps + other.reps,
                               other.n_reps, other.seed)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rep_seeds(master_seed, rep):
    """Independent (data, cv) seeds for one repetition."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(rep,))
    data_ss, cv_ss = ss.spawn(2)
    return data_ss, int(cv_ss.generate_state(1)[0])


def evaluate_method(sim, method, cv_seed, settings: CVSettings) -> RepResult:
    data = sim.data
    truth = sim.beta_true_std
    lam = theta = None
    if method == "oracle":
        beta = truth.copy()
    else:
        cv = cross_validate(data, method, theta_values=settings.thetas, k=settings.k,
                            seed=cv_seed, n_lambda=settings.n_lambda,
                            min_ratio=settings.min_ratio, gamma=settings.gamma,
                            alpha=settings.alpha, gram_scale=settings.gram_scale,
                            tol=settings.tol)
        lam, theta = cv.best
        beta = fit_method(data, method, lam, theta, gamma=settings.gamma, alpha=settings.alpha,
                          gram_scale=settings.gram_scale, tol=settings.tol).beta
    tpr, tnr, exact = selection_metrics(beta, sim.support_true, data.p)
    return RepResult(method, -1, estimation_error(beta, truth),
                     prediction_error(data.X, beta, truth), tpr, tnr, exact, lam, theta)


def _one_rep(scenario, methods, rep, master_seed, settings):
    data_ss, cv_seed = rep_seeds(master_seed, rep)
    sim = scenario.generate(data_ss)
    out = []
    for m in methods:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = evaluate_method(sim, m, cv_seed, settings)
        except SppcsoError as exc:
            res = RepResult(m, rep, np.nan, np.nan, np.nan, np.nan, np.nan,
                            error=f"{type(exc).__name__}: {exc}")
        res.rep = rep
        out.append(res)
    return out


def _summary(vals):
    vals = np.asarray(vals, dtype=float)
    mean = float(vals.mean())
    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return mean, std


def run_benchmark(methods, scenario: Scenario, n_reps, master_seed=0, threads=1,
                  settings: CVSettings = None) -> BenchmarkReport:
    """Repeat simulate / tune / score ``n_reps`` times and aggregate per method.

    Repetition i draws its data and folds from streams keyed by
    (master_seed, i), so the report does not depend on ``threads``.
    """
    if n_reps < 1:
        raise BadDimensions("n_reps must be at least 1")
    for m in methods:
        if m not in BENCH_METHODS:
            raise SppcsoError(f"unknown method {m!r}; valid methods: {', '.join(BENCH_METHODS)}")
    settings = settings or CVSettings()

    def job(i):
        return _one_rep(scenario, methods, i, master_seed, settings)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_rep = list(pool.map(job, range(n_reps)))
    else:
        per_rep = [job(i) for i in range(n_reps)]

    rows, records = [], []
    for k, m in enumerate(methods):
        results = [rr[k] for rr in per_rep]
        good = [r for r in results if r.error is None]
        failed = len(results) - len(good)
        if failed:
            log.warning("%s: %d of %d repetitions failed", m, failed, n_reps)
            warnings.warn(f"{m}: {failed} of {n_reps} repetitions failed", RuntimeWarning)
        if failed > MAX_FAIL_FRACTION * n_reps or not good:
            raise BenchmarkFailed(f"{m}: {failed} of {n_reps} repetitions failed "
                                  f"(first error: {next(r.error for r in results if r.error)})")
        est = _summary([r.est_err for r in good])
        pred = _summary([r.pred_err for r in good])
        rows.append({
            "method": m, "scenario": scenario.label,
            "est_err_mean": est[0], "est_err_std": est[1],
            "pred_err_mean": pred[0], "pred_err_std": pred[1],
            "tpr": float(np.mean([r.tpr for r in good])),
            "tnr": float(np.mean([r.tnr for r in good])),
            "tmr": float(np.mean([r.exact for r in good])),
            "n_reps": len(good), "seed": master_seed,
        })
        records.extend({"scenario": scenario.label, **asdict(r)} for r in results)
    return BenchmarkReport(rows, records, n_reps, master_seed)
