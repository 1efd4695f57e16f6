"""Estimation, prediction and support-recovery metrics."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptySupport


def _vec(a):
    return np.asarray(a, dtype=float).ravel()


def estimation_error(beta_hat, beta_true) -> float:
    """||beta_hat - beta_true||_2."""
    b, t = _vec(beta_hat), _vec(beta_true)
    if b.shape != t.shape:
        raise DimensionMismatch(f"lengths differ: {b.size} vs {t.size}")
    return float(np.linalg.norm(b - t))


def prediction_error(X, beta_hat, beta_true) -> float:
    """(1/n) ||X (beta_hat - beta_true)||^2."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    b, t = _vec(beta_hat), _vec(beta_true)
    if b.shape != t.shape or X.shape[1] != b.size:
        raise DimensionMismatch(f"X {X.shape}, beta_hat {b.shape}, beta_true {t.shape}")
    e = X @ (b - t)
    return float(e @ e / X.shape[0])


def selection_metrics(beta_hat, support_true, p=None):
    """(true positive rate, true negative rate, exact-recovery indicator).

    ``support_true`` holds 0-based column indices.
    """
    b = _vec(beta_hat)
    p = b.size if p is None else p
    if b.size != p:
        raise DimensionMismatch(f"beta_hat has length {b.size}, expected {p}")
    S = np.zeros(p, dtype=bool)
    idx = np.asarray(support_true, dtype=int).ravel()
    if idx.size == 0:
        raise EmptySupport("true support is empty")
    S[idx] = True
    nz = b != 0
    tpr = nz[S].mean()
    tnr = (~nz[~S]).mean() if (~S).any() else 1.0
    exact = float(nz[S].all() and not nz[~S].any())
    return float(tpr), float(tnr), exact


def mape(y_hat, y) -> float:
    """Mean absolute prediction error."""
    a, b = _vec(y_hat), _vec(y)
    if a.shape != b.shape or a.size == 0:
        raise DimensionMismatch(f"lengths {a.size} and {b.size}")
    return float(np.mean(np.abs(a - b)))


def nnz(beta_hat) -> int:
    return int(np.count_nonzero(_vec(beta_hat)))
