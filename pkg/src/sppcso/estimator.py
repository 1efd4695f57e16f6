"""Single-parametric principal component selection operator (SPPCSO).

The estimator runs in two stages. A lasso fit at the requested lambda gives an
initial support S. The Gram matrix of S is eigendecomposed, X_S'X_S = U D U',
and each principal direction receives a quadratic penalty K_i chosen so that
the implied ridge-type estimator shrinks component i by

    A_i = (d_i - 1 + theta) / d_i   if d_i >= 1
    A_i = theta * d_i               if d_i < 1

Writing Z_S = sqrt(K) U', the second stage solves

    min (1/2n) ||y - X b||^2 + (1/2n) ||Z b||^2 + lambda ||b||_1

as a plain lasso on the design (X; Z) with response (y; 0).

``gram_scale`` decides which matrix's eigenvalues d_i are: ``"raw"`` (the
default) takes X_S'X_S itself, ``"n"`` takes X_S'X_S / n and scales Z by
sqrt(n) so that the quadratic penalty stays on the same footing as the loss.
Under ``"raw"`` the penalty fades relative to the loss as n grows; under
``"n"`` it does not, and the shrinkage of small components is much stronger.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySupport, InvalidTheta, SingularGram
from .linalg import EigenDecomposition, sym_eigen
from .solvers import DEFAULT_MAX_ITER, DEFAULT_TOL, FitResult, PenaltySpec, cd_fit

GRAM_SCALES = ("n", "raw")
DEFAULT_GRAM_SCALE = "raw"


def _check_theta(theta):
    if not 0.0 < theta < 1.0:
        raise InvalidTheta(f"theta must lie in (0, 1), got {theta}")


def _check_scale(gram_scale):
    if gram_scale not in GRAM_SCALES:
        raise ValueError(f"gram_scale must be one of {GRAM_SCALES}, got {gram_scale!r}")


def shrinkage_factor(d, theta):
    """Per-component shrinkage of the single-parametric PC regression estimator."""
    _check_theta(theta)
    d = np.asarray(d, dtype=float)
    big = d >= 1.0
    out = np.where(big, (d - 1.0 + theta) / np.where(big, d, 1.0), theta * d)
    return float(out) if out.ndim == 0 else out


def ridge_factor(d, k):
    d = np.asarray(d, dtype=float)
    return d / (d + k)


def liu_factor(d, h):
    d = np.asarray(d, dtype=float)
    return (d + h) / (d + 1.0)


def penalty_diag(d, theta):
    """Quadratic penalty weights K with shrinkage_factor(d, theta) = d / (d + K).

    Both branches give (1 - theta) / theta at d = 1, and every weight is
    strictly positive for theta in (0, 1).
    """
    _check_theta(theta)
    d = np.asarray(d, dtype=float)
    big = d >= 1.0
    safe = np.where(big, d + theta - 1.0, 1.0)
    out = np.where(big, d * (1.0 - theta) / safe, 1.0 / theta - d)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SppcsoPenalty:
    support: np.ndarray
    U: np.ndarray
    d: np.ndarray
    theta: float
    K: np.ndarray
    Z_rows: np.ndarray
    gram_scale: str = DEFAULT_GRAM_SCALE

    @property
    def matrix(self):
        """Z_S' Z_S, the quadratic penalty on the support coefficients."""
        return self.Z_rows.T @ self.Z_rows


@dataclass(frozen=True)
class AugmentedDesign:
    X_star: np.ndarray
    y_star: np.ndarray
    n_effective: int
    penalty: SppcsoPenalty

    def full_Z(self):
        return self.X_star[self.n_effective:]


def support_eigen(X, support, gram_scale=DEFAULT_GRAM_SCALE) -> EigenDecomposition:
    _check_scale(gram_scale)
    XS = np.asarray(X, dtype=float)[:, support]
    G = XS.T @ XS
    if gram_scale == "n":
        G = G / XS.shape[0]
    return sym_eigen(G)


def make_penalty(eigen: EigenDecomposition, support, theta, n,
                 gram_scale=DEFAULT_GRAM_SCALE) -> SppcsoPenalty:
    K = penalty_diag(eigen.d, theta)
    K = np.atleast_1d(K)
    d_min = eigen.d[-1]
    if d_min < 1.0 and theta <= d_min:
        warnings.warn(f"theta={theta} lies at or below the smallest eigenvalue {d_min:.4g}",
                      RuntimeWarning, stacklevel=3)
    mult = float(n) if gram_scale == "n" else 1.0
    Z_rows = np.sqrt(mult * K)[:, None] * eigen.U.T
    return SppcsoPenalty(np.asarray(support, dtype=np.int64), eigen.U, eigen.d,
                         float(theta), K, Z_rows, gram_scale)


def build_augmentation(data, support, theta, gram_scale=DEFAULT_GRAM_SCALE,
                       eigen: EigenDecomposition = None) -> AugmentedDesign:
    """Stack the penalty rows under X, embedding Z_S at the support columns."""
    _check_theta(theta)
    support = np.asarray(support, dtype=np.int64).ravel()
    if support.size == 0:
        raise EmptySupport("empty support: SPPCSO reduces to the lasso")
    X, y = data.X, data.y
    n, p = X.shape
    if eigen is None:
        eigen = support_eigen(X, support, gram_scale)
    pen = make_penalty(eigen, support, theta, n, gram_scale)
    q = support.size
    X_star = np.zeros((n + q, p))
    X_star[:n] = X
    X_star[n:, support] = pen.Z_rows
    y_star = np.concatenate([y, np.zeros(q)])
    return AugmentedDesign(X_star, y_star, n, pen)


def sppcr_estimate(X_S, y, theta, gram_scale=DEFAULT_GRAM_SCALE):
    """Shrink each principal component of the OLS fit: U A U' beta_ols."""
    _check_theta(theta)
    X_S = np.atleast_2d(np.asarray(X_S, dtype=float))
    y = np.asarray(y, dtype=float)
    if X_S.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X_S has {X_S.shape[0]} rows but y has {y.shape[0]}")
    n = X_S.shape[0]
    G = X_S.T @ X_S
    eig = sym_eigen(G / n if gram_scale == "n" else G)
    if eig.d[-1] <= 1e-12 * max(eig.d[0], 1e-300):
        raise SingularGram("X_S'X_S is singular")
    beta_ols = np.linalg.solve(G, X_S.T @ y)
    A = shrinkage_factor(eig.d, theta)
    return eig.U @ (np.atleast_1d(A) * (eig.U.T @ beta_ols))


def sppcr_estimate_penalized(X_S, y, theta, gram_scale=DEFAULT_GRAM_SCALE):
    """The same estimator in ridge form: (X_S'X_S + P)^-1 X_S' y."""
    _check_theta(theta)
    X_S = np.atleast_2d(np.asarray(X_S, dtype=float))
    n = X_S.shape[0]
    G = X_S.T @ X_S
    eig = sym_eigen(G / n if gram_scale == "n" else G)
    if eig.d[-1] <= 1e-12 * max(eig.d[0], 1e-300):
        raise SingularGram("X_S'X_S is singular")
    pen = make_penalty(eig, np.arange(G.shape[0]), theta, n, gram_scale)
    return np.linalg.solve(G + pen.matrix, X_S.T @ np.asarray(y, dtype=float))


@dataclass(frozen=True)
class SppcsoResult(FitResult):
    penalty: SppcsoPenalty = None
    initial: FitResult = None


def sppcso_fit(data, lam, theta, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               gram_scale=DEFAULT_GRAM_SCALE, init=None, lasso_fit: FitResult = None,
               eigen: EigenDecomposition = None) -> SppcsoResult:
    """Two-stage SPPCSO fit at a single (lambda, theta).

    ``init`` warm-starts the stage-one lasso. A precomputed stage-one fit (and
    the eigendecomposition of its support) may be passed in to share work
    across a theta grid.
    """
    _check_theta(theta)
    spec = PenaltySpec("lasso", lam)
    if lasso_fit is None:
        lasso_fit = cd_fit(data.X, data.y, spec, init=init, tol=tol, max_iter=max_iter)
    support = lasso_fit.support
    if support.size == 0:
        return SppcsoResult(lasso_fit.beta.copy(), lasso_fit.iterations, lasso_fit.objective,
                            lasso_fit.converged, reduced_to_lasso=True, initial=lasso_fit)
    aug = build_augmentation(data, support, theta, gram_scale, eigen=eigen)
    fit = cd_fit(aug.X_star, aug.y_star, spec, init=lasso_fit.beta, tol=tol,
                 max_iter=max_iter, n_scale=aug.n_effective)
    return SppcsoResult(fit.beta, fit.iterations, fit.objective, fit.converged,
                        penalty=aug.penalty, initial=lasso_fit)


def sppcso_objective(data, penalty: SppcsoPenalty, lam, beta):
    """(1/2n)||y - X b||^2 + (1/2n)||Z b||^2 + lambda ||b||_1."""
    beta = np.asarray(beta, dtype=float)
    n = data.n
    r = data.y - data.X @ beta
    zb = penalty.Z_rows @ beta[penalty.support]
    return float(r @ r / (2 * n) + zb @ zb / (2 * n) + lam * np.abs(beta).sum())


def lemma_condition(penalty: SppcsoPenalty, beta, lam, n):
    """Check Lambda_max(Z'Z / n) * ||beta||_inf <= lambda / 4.

    ``beta`` plays the role of the unknown true coefficients; pass the fitted
    vector for a plug-in diagnostic. Returns (lhs, rhs, holds).
    """
    top = np.linalg.eigvalsh(penalty.matrix / n)[-1] if penalty.support.size else 0.0
    lhs = float(top * np.max(np.abs(beta), initial=0.0))
    rhs = lam / 4.0
    return lhs, rhs, lhs <= rhs
