"""Expression-matrix screening and repeated train/test evaluation.

Input files are delimiter-separated text: the first row holds probe ids (its
first cell labels the sample column), every later row is one sample whose
first cell is the sample id. Gzip-compressed files are read transparently.
"""

from __future__ import annotations

import csv
import gzip
import io
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (BadSplit, DimensionMismatch, EmptyAfterFilter, KTooLarge, MalformedFile,
                     MissingTarget, NonNumericValue, NonpositiveValue, SppcsoError)
from .estimator import DEFAULT_GRAM_SCALE
from .linalg import Dataset, standardize
from .methods import check_method, fit_method
from .metrics import mape, nnz
from .selection import DEFAULT_FOLDS, DEFAULT_MIN_RATIO, DEFAULT_N_LAMBDA, cross_validate


@dataclass(frozen=True)
class ExpressionMatrix:
    values: np.ndarray  # samples x probes
    probe_ids: tuple
    sample_ids: tuple

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probe_ids", tuple(str(p) for p in self.probe_ids))
        object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        if v.shape != (len(self.sample_ids), len(self.probe_ids)):
            raise DimensionMismatch(f"values {v.shape} vs {len(self.sample_ids)} samples, "
                                    f"{len(self.probe_ids)} probes")
        if len(set(self.probe_ids)) != len(self.probe_ids):
            raise MalformedFile(1, "duplicate probe ids")
        if not np.isfinite(v).all():
            raise SppcsoError("expression values must be finite")

    @property
    def n_probes(self):
        return len(self.probe_ids)

    def take(self, cols) -> "ExpressionMatrix":
        cols = np.asarray(cols, dtype=int)
        return ExpressionMatrix(self.values[:, cols], [self.probe_ids[c] for c in cols],
                                self.sample_ids)


def _open_text(path):
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def read_table(path, delimiter=None):
    """Parse a labelled numeric table. Returns (header, row_ids, values).

    Line numbers in errors are 1-based and count the header line.
    """
    with _open_text(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines:
        raise MalformedFile(1, "empty file")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(lines, delimiter=delimiter))
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise MalformedFile(1, "header needs a sample-id column and at least one probe")
    ids, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedFile(lineno, f"expected {len(header)} fields, found {len(row)}")
        ids.append(row[0].strip())
        vals = []
        for col, cell in enumerate(row[1:], start=2):
            try:
                x = float(cell)
            except ValueError:
                raise NonNumericValue(lineno, col, cell) from None
            if not np.isfinite(x):
                raise NonNumericValue(lineno, col, cell)
            vals.append(x)
        values.append(vals)
    if not values:
        raise MalformedFile(len(rows), "no data rows")
    return header[1:], ids, np.array(values)


def load_expression(path, target_probe_id, delimiter=None):
    """Read an expression file and split off the target probe as the response."""
    probes, samples, values = read_table(path, delimiter)
    target = str(target_probe_id)
    if target not in probes:
        raise MissingTarget(f"target probe {target!r} not found in {path}")
    j = probes.index(target)
    keep = [k for k in range(len(probes)) if k != j]
    expr = ExpressionMatrix(values[:, keep], [probes[k] for k in keep], samples)
    return expr, values[:, j].copy()


def filter_probes(expr: ExpressionMatrix, max_quantile=0.25, fold_change=2.0,
                  spread_fallback=False) -> ExpressionMatrix:
    """Drop unexpressed probes, then probes without enough dynamic range.

    A probe is unexpressed when its maximum lies below the ``max_quantile``
    quantile (linear interpolation) of all values in the matrix. A probe is
    kept when max / min >= ``fold_change``. That ratio needs positive values;
    with ``spread_fallback`` the values are treated as log2 data and the rule
    becomes max - min >= log2(fold_change).
    """
    if not 0 < max_quantile < 1:
        raise ValueError(f"max_quantile must lie in (0, 1), got {max_quantile}")
    if fold_change < 1:
        raise ValueError(f"fold_change must be at least 1, got {fold_change}")
    v = expr.values
    cut = np.quantile(v, max_quantile)
    hi = v.max(axis=0)
    lo = v.min(axis=0)
    expressed = hi >= cut
    if (lo[expressed] <= 0).any():
        if not spread_fallback:
            raise NonpositiveValue("fold change is undefined for nonpositive expression values; "
                                   "enable the spread fallback for log-scale data")
        warnings.warn("nonpositive expression values: using max - min >= log2(fold_change)",
                      RuntimeWarning, stacklevel=2)
        varied = hi - lo >= np.log2(fold_change)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            varied = np.where(lo > 0, hi / np.where(lo > 0, lo, 1.0), np.inf) >= fold_change
    keep = np.flatnonzero(expressed & varied)
    if keep.size == 0:
        raise EmptyAfterFilter("no probe survived filtering")
    return expr.take(keep)


def top_variance(expr: ExpressionMatrix, k) -> ExpressionMatrix:
    """Keep the k probes with the largest sample variance, in their original order.

    Equal variances are ranked by probe id.
    """
    if k > expr.n_probes:
        raise KTooLarge(f"asked for {k} probes but only {expr.n_probes} are available")
    var = expr.values.var(axis=0, ddof=1)
    order = sorted(range(expr.n_probes), key=lambda j: (-var[j], expr.probe_ids[j]))
    return expr.take(sorted(order[:k]))


def split_train_test(n, n_train, seed, resample=False):
    """Random disjoint train/test index sets.

    With ``resample`` the test set is instead n - n_train draws with
    replacement from the samples not used for training.
    """
    if not 0 < n_train < n:
        raise BadSplit(f"need 0 < n_train < n, got n_train={n_train}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    train, rest = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    if resample:
        rest = np.sort(rng.choice(rest, size=n - n_train, replace=True))
    return train, rest


@dataclass
class GeneReport:
    summary: list
    repetitions: list = field(default_factory=list)
    seed: int = 0


def _gene_rep(X, y, methods, rep, seed, n_train, resample, cv_opts):
    ss = np.random.SeedSequence(seed, spawn_key=(rep,))
    split_ss, cv_ss = ss.spawn(2)
    train, test = split_train_test(len(y), n_train, split_ss, resample)
    data = standardize(Dataset(X[train], y[train]))
    cv_seed = int(cv_ss.generate_state(1)[0])
    out = []
    for m in methods:
        cv = cross_validate(data, m, seed=cv_seed, **cv_opts)
        lam, theta = cv.best
        beta = fit_method(data, m, lam, theta, gamma=cv_opts["gamma"], alpha=cv_opts["alpha"],
                          gram_scale=cv_opts["gram_scale"]).beta
        pred_train = data.X @ beta + data.y_center
        pred_test = data.transform(X[test]) @ beta + data.y_center
        out.append({"rep": rep, "method": m, "lambda": lam, "theta": theta,
                    "mape_train": mape(pred_train, y[train]),
                    "mape_test": mape(pred_test, y[test]), "nnz": nnz(beta)})
    return out


def run_gene_experiment(expr: ExpressionMatrix, target, methods, n_reps=100, seed=0,
                        n_train=60, resample=False, k=DEFAULT_FOLDS, n_lambda=DEFAULT_N_LAMBDA,
                        min_ratio=DEFAULT_MIN_RATIO, thetas=None, gamma=None, alpha=None,
                        gram_scale=DEFAULT_GRAM_SCALE, threads=1) -> GeneReport:
    """Repeated random splits; every method is CV-tuned on the training half."""
    for m in methods:
        check_method(m)
    X = expr.values
    y = np.asarray(target, dtype=float)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} samples but target has {y.shape[0]}")
    cv_opts = dict(k=k, n_lambda=n_lambda, min_ratio=min_ratio, theta_values=thetas,
                   gamma=gamma, alpha=alpha, gram_scale=gram_scale)

    def job(r):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return _gene_rep(X, y, methods, r, seed, n_train, resample, cv_opts)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_rep = list(pool.map(job, range(n_reps)))
    else:
        per_rep = [job(r) for r in range(n_reps)]
    rows = [row for rr in per_rep for row in rr]
    summary = []
    for m in methods:
        mine = [r for r in rows if r["method"] == m]
        summary.append({"method": m,
                        "mape_train": float(np.mean([r["mape_train"] for r in mine])),
                        "mape_test": float(np.mean([r["mape_test"] for r in mine])),
                        "nnz": float(np.mean([r["nnz"] for r in mine]))})
    return GeneReport(summary, rows, seed)
