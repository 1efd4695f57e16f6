"""Data standardization and a Jacobi eigensolver for symmetric matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConstantColumn, DimensionMismatch, NotSymmetric, TooFewRows

SYMMETRY_TOL = 1e-10
JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Response and design matrix, with the transform applied to reach them.

    ``column_centers`` and ``column_scales`` map a standardized column back
    to raw units: ``raw = centered * scale + center``. Coefficients map back
    as ``beta_raw = beta / column_scales``.
    """

    X: np.ndarray
    y: np.ndarray
    standardized: bool = False
    column_scales: np.ndarray = None
    column_centers: np.ndarray = None
    y_center: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        p = X.shape[1]
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        centers = np.zeros(p) if self.column_centers is None else self.column_centers
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "column_scales", _frozen(scales))
        object.__setattr__(self, "column_centers", _frozen(centers))
        object.__setattr__(self, "y_center", float(self.y_center))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def transform(self, X_raw, y_raw=None):
        """Apply this dataset's standardization to new raw observations."""
        Xs = (np.asarray(X_raw, dtype=float) - self.column_centers) / self.column_scales
        if y_raw is None:
            return Xs
        return Xs, np.asarray(y_raw, dtype=float) - self.y_center

    def to_raw_coef(self, beta):
        return np.asarray(beta, dtype=float) / self.column_scales

    def subset(self, rows) -> "Dataset":
        """Raw-scale rows of this dataset (the transform is undone first)."""
        rows = np.asarray(rows)
        X = self.X[rows] * self.column_scales + self.column_centers
        y = self.y[rows] + self.y_center
        return Dataset(X, y)


def standardize(raw: Dataset) -> Dataset:
    """Center y, center X and scale each column so that X_j'X_j / n = 1.

    Population scaling is used (divide by sqrt(sum(x^2) / n)), not the sample
    standard deviation.
    """
    X, y = raw.X, raw.y
    n = X.shape[0]
    if n < 2:
        raise TooFewRows(f"need at least 2 rows, got {n}")
    mu = X.mean(axis=0)
    Xc = X - mu
    scale = np.sqrt((Xc ** 2).sum(axis=0) / n)
    # a column whose spread is pure rounding noise relative to its level is constant
    level = np.maximum(np.abs(mu), 1.0)
    for j in np.flatnonzero(scale <= 1e-13 * level):
        raise ConstantColumn(int(j))
    y_mu = y.mean()
    return Dataset(
        Xc / scale,
        y - y_mu,
        standardized=True,
        column_scales=raw.column_scales * scale,
        column_centers=raw.column_centers + raw.column_scales * mu,
        y_center=raw.y_center + y_mu,
    )


@dataclass(frozen=True)
class EigenDecomposition:
    """Orthonormal eigenvectors (columns of ``U``) and descending eigenvalues ``d``."""

    U: np.ndarray
    d: np.ndarray
    sweeps: int = field(default=0, compare=False)

    def reconstruct(self):
        return (self.U * self.d) @ self.U.T


@njit(cache=True, nogil=True)
def _jacobi(A, tol, max_sweeps):
    q = A.shape[0]
    V = np.eye(q)
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(q):
            for j in range(i + 1, q):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) <= tol:
            return A, V, sweeps
        sweeps += 1
        for i in range(q - 1):
            for j in range(i + 1, q):
                aij = A[i, j]
                if aij == 0.0:
                    continue
                tau = (A[j, j] - A[i, i]) / (2.0 * aij)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(q):
                    aki = A[k, i]
                    akj = A[k, j]
                    A[k, i] = c * aki - s * akj
                    A[k, j] = s * aki + c * akj
                for k in range(q):
                    aik = A[i, k]
                    ajk = A[j, k]
                    A[i, k] = c * aik - s * ajk
                    A[j, k] = s * aik + c * ajk
                for k in range(q):
                    vki = V[k, i]
                    vkj = V[k, j]
                    V[k, i] = c * vki - s * vkj
                    V[k, j] = s * vki + c * vkj
    return A, V, sweeps


def sym_eigen(M) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back in descending order. Each eigenvector is signed so
    that its first entry of magnitude above 1e-10 is positive, which makes the
    output a deterministic function of the input.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T))
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(M))):
        raise NotSymmetric(f"matrix asymmetry {asym:.3g} exceeds tolerance")
    A = 0.5 * (M + M.T)
    fro = np.linalg.norm(A)
    A, V, sweeps = _jacobi(A.copy(), JACOBI_REL_TOL * fro, JACOBI_MAX_SWEEPS)
    d = np.diag(A).copy()
    order = np.argsort(-d, kind="stable")
    d = d[order]
    U = V[:, order]
    for k in range(U.shape[1]):
        big = np.flatnonzero(np.abs(U[:, k]) > 1e-10)
        if big.size and U[big[0], k] < 0:
            U[:, k] = -U[:, k]
    return EigenDecomposition(_frozen(U), _frozen(d), sweeps)
