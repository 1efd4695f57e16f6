"""Uniform entry points over every estimator: single fits and warm-started paths."""

from __future__ import annotations

import numpy as np

from .errors import InvalidPenalty, SppcsoError
from .estimator import DEFAULT_GRAM_SCALE, support_eigen, sppcso_fit
from .solvers import DEFAULT_MAX_ITER, DEFAULT_TOL, FAMILIES, PenaltySpec, cd_fit

METHODS = FAMILIES + ("sppcso",)


def check_method(method):
    if method not in METHODS:
        raise InvalidPenalty(f"unknown method {method!r}; valid methods: {', '.join(METHODS)}")


def penalty_for(method, lam, gamma=None, alpha=None) -> PenaltySpec:
    return PenaltySpec("lasso" if method == "sppcso" else method, lam, gamma, alpha)


def fit_method(data, method, lam, theta=None, init=None, gamma=None, alpha=None,
               gram_scale=DEFAULT_GRAM_SCALE, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    check_method(method)
    if method == "sppcso":
        if theta is None:
            raise InvalidPenalty("sppcso needs theta")
        return sppcso_fit(data, lam, theta, tol=tol, max_iter=max_iter,
                          gram_scale=gram_scale, init=init)
    spec = penalty_for(method, lam, gamma, alpha)
    return cd_fit(data.X, data.y, spec, init=init, tol=tol, max_iter=max_iter)


def fit_path(data, method, lambdas, thetas=None, gamma=None, alpha=None,
             gram_scale=DEFAULT_GRAM_SCALE, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
             skip_errors=False):
    """Coefficients along a descending lambda grid, warm-started.

    Returns an array of shape (len(lambdas), len(thetas), p); non-SPPCSO
    methods use a single dummy theta slot. For SPPCSO the stage-one lasso path
    and the support eigendecomposition are shared by all thetas at a lambda.
    With ``skip_errors`` a failing grid point is filled with NaN instead of
    aborting the path.
    """
    check_method(method)
    lambdas = np.asarray(lambdas, dtype=float)
    thetas = [None] if method != "sppcso" else list(thetas)
    out = np.zeros((lambdas.size, len(thetas), data.p))
    spec = penalty_for(method, 0.0, gamma, alpha)
    beta = None
    for i, lam in enumerate(lambdas):
        try:
            fit = cd_fit(data.X, data.y, spec.with_lambda(lam), init=beta, tol=tol, max_iter=max_iter)
        except SppcsoError:
            if not skip_errors:
                raise
            out[i] = np.nan
            continue
        beta = fit.beta
        if method != "sppcso":
            out[i, 0] = beta
            continue
        if fit.nnz == 0:
            out[i, :] = beta
            continue
        eig = support_eigen(data.X, fit.support, gram_scale)
        for t, theta in enumerate(thetas):
            try:
                out[i, t] = sppcso_fit(data, lam, theta, tol=tol, max_iter=max_iter,
                                       gram_scale=gram_scale, lasso_fit=fit, eigen=eig).beta
            except SppcsoError:
                if not skip_errors:
                    raise
                out[i, t] = np.nan
    return out
