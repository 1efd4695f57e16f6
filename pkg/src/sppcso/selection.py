"""K-fold cross-validation over (lambda, theta) grids."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadFoldCount, CVFailed
from .estimator import DEFAULT_GRAM_SCALE
from .linalg import standardize
from .methods import check_method, fit_path
from .solvers import DEFAULT_MAX_ITER, DEFAULT_TOL, lambda_path

DEFAULT_FOLDS = 5
DEFAULT_N_LAMBDA = 50
DEFAULT_MIN_RATIO = 0.01


def kfold_split(n, k, seed):
    """Random partition of range(n) into k folds whose sizes differ by at most one."""
    if k < 2 or n < k:
        raise BadFoldCount(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def theta_grid():
    """0.1, 0.2, ..., 0.9: the 0.1-step grid on [0, 1] without its endpoints."""
    return np.round(np.arange(1, 10) / 10.0, 1)


@dataclass(frozen=True)
class CVResult:
    method: str
    lambdas: np.ndarray
    thetas: np.ndarray
    fold_mse: np.ndarray  # (k, n_lambda, n_theta), NaN where a fit failed
    mean_mse: np.ndarray  # (n_lambda, n_theta)
    std_mse: np.ndarray
    best: tuple
    best_index: tuple

    @property
    def grid(self):
        return [(lam, th) for lam in self.lambdas for th in self.thetas]

    def curve(self):
        """(lambda, theta, mean_mse, std_mse) rows in grid order."""
        rows = []
        for i, lam in enumerate(self.lambdas):
            for t, th in enumerate(self.thetas):
                rows.append((float(lam), float(th), float(self.mean_mse[i, t]),
                             float(self.std_mse[i, t])))
        return rows


def select_best(mean_mse, lambdas, thetas):
    """Index of the minimal mean MSE; ties go to larger lambda, then larger theta."""
    best, best_key = None, None
    for i, lam in enumerate(lambdas):
        for t, th in enumerate(thetas):
            m = mean_mse[i, t]
            if np.isnan(m):
                continue
            key = (m, -lam, -(th if not np.isnan(th) else 0.0))
            if best_key is None or key < best_key:
                best, best_key = (i, t), key
    return best


def _fold_errors(data, train, valid, method, lambdas, thetas, opts):
    fold = standardize(data.subset(train))
    raw = data.subset(valid)
    Xv, yv = fold.transform(raw.X, raw.y)
    coefs = fit_path(fold, method, lambdas, thetas, skip_errors=True, **opts)
    resid = yv[None, None, :] - np.einsum("ltp,np->ltn", coefs, Xv)
    return np.mean(resid ** 2, axis=2)


def cross_validate(data, method, lambda_grid=None, theta_values=None, k=DEFAULT_FOLDS, seed=0,
                   n_lambda=DEFAULT_N_LAMBDA, min_ratio=DEFAULT_MIN_RATIO, gamma=None,
                   alpha=None, gram_scale=DEFAULT_GRAM_SCALE, tol=DEFAULT_TOL,
                   max_iter=DEFAULT_MAX_ITER, threads=1) -> CVResult:
    """Validation MSE for every grid point, averaged over k folds.

    Each training fold is standardized on its own and that transform is
    applied to the held-out fold. When no lambda grid is given, one is built
    from the full standardized data so that all folds share grid points.
    ``theta_values`` is ignored for methods other than sppcso.
    """
    check_method(method)
    if lambda_grid is None:
        a = alpha if alpha is not None else (0.5 if method in ("enet", "mnet") else 1.0)
        lambda_grid = lambda_path(data, n_lambda, min_ratio, alpha=a)
    lambdas = np.sort(np.asarray(lambda_grid, dtype=float))[::-1]
    if method == "sppcso":
        thetas = np.asarray(theta_grid() if theta_values is None else theta_values, dtype=float)
    else:
        thetas = np.array([np.nan])
    folds = kfold_split(data.n, k, seed)
    everything = np.arange(data.n)
    opts = dict(gamma=gamma, alpha=alpha, gram_scale=gram_scale, tol=tol, max_iter=max_iter)

    def run(f):
        return _fold_errors(data, np.setdiff1d(everything, f), f, method, lambdas,
                            thetas if method == "sppcso" else None, opts)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            errs = list(pool.map(run, folds))
    else:
        errs = [run(f) for f in folds]
    fold_mse = np.stack(errs)
    ok = ~np.isnan(fold_mse)
    if not ok.any():
        raise CVFailed(f"every {method} fit failed during cross-validation")
    counts = ok.sum(axis=0)
    total = np.where(ok, fold_mse, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, total / np.maximum(counts, 1), np.nan)
        dev = np.where(ok, fold_mse - mean[None], 0.0)
        std = np.where(counts > 1, np.sqrt((dev ** 2).sum(axis=0) / np.maximum(counts - 1, 1)),
                       np.where(counts == 1, 0.0, np.nan))
    i, t = select_best(mean, lambdas, thetas)
    best = (float(lambdas[i]), None if np.isnan(thetas[t]) else float(thetas[t]))
    return CVResult(method, lambdas, thetas, fold_mse, mean, std, best, (i, t))
