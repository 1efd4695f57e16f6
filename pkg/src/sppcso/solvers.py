"""Threshold operators and the coordinate-descent engine for penalized least squares.

Every fit minimizes

    (1 / 2n) ||y - X beta||^2 + sum_j pen(|beta_j|)

with one of the penalties below. ``lambda`` is the overall level, ``gamma`` the
concavity of MCP/SCAD/Mnet and ``alpha`` the L1 share of Enet/Mnet:

    lasso  lambda |b|
    enet   lambda alpha |b| + lambda (1 - alpha) b^2
    mcp    lambda int_0^|b| (1 - x / (gamma lambda))_+ dx
    scad   Fan & Li's three-piece penalty
    mnet   mcp(lambda alpha) + lambda (1 - alpha) b^2
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DimensionMismatch, Diverged, EmptyData, InvalidGamma, InvalidPenalty

FAMILIES = ("lasso", "enet", "mcp", "scad", "mnet")
CONVEX_FAMILIES = ("lasso", "enet")
DEFAULT_GAMMA = {"mcp": 3.0, "mnet": 3.0, "scad": 3.7}
DEFAULT_ALPHA = 0.5
DEFAULT_TOL = 1e-4
DEFAULT_MAX_ITER = 10_000

_LASSO, _ENET, _MCP, _SCAD, _MNET = range(5)
_CODE = dict(zip(FAMILIES, range(5)))


@dataclass(frozen=True)
class PenaltySpec:
    family: str = "lasso"
    lam: float = 0.0
    gamma: float = None
    alpha: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidPenalty(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.lam >= 0:
            raise InvalidPenalty(f"lambda must be nonnegative, got {self.lam}")
        gamma = self.gamma if self.gamma is not None else DEFAULT_GAMMA.get(self.family, np.nan)
        alpha = self.alpha if self.alpha is not None else (
            DEFAULT_ALPHA if self.family in ("enet", "mnet") else 1.0)
        if self.family == "scad" and not gamma > 2:
            raise InvalidGamma(f"scad requires gamma > 2, got {gamma}")
        if self.family in ("mcp", "mnet") and not gamma > 0:
            raise InvalidGamma(f"{self.family} requires gamma > 0, got {gamma}")
        if self.family in ("enet", "mnet") and not 0 < alpha <= 1:
            raise InvalidPenalty(f"alpha must lie in (0, 1], got {alpha}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "gamma", float(gamma))
        object.__setattr__(self, "alpha", float(alpha))

    @property
    def convex(self) -> bool:
        return self.family in CONVEX_FAMILIES

    def with_lambda(self, lam) -> "PenaltySpec":
        return PenaltySpec(self.family, lam, self.gamma, self.alpha)


@dataclass(frozen=True)
class FitResult:
    beta: np.ndarray
    iterations: int
    objective: float
    converged: bool
    reduced_to_lasso: bool = False
    history: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.beta))


# ---------------------------------------------------------------- kernels

@njit(cache=True, nogil=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True, nogil=True)
def _mcp_update(z, v, lam, gamma):
    if abs(z) <= gamma * lam * v:
        return _soft(z, lam) / (v - 1.0 / gamma)
    return z / v


@njit(cache=True, nogil=True)
def _update(z, v, fam, lam, gamma, alpha):
    """argmin_b  v/2 b^2 - z b + pen(|b|)."""
    if fam == 0:
        return _soft(z, lam) / v
    if fam == 1:
        return _soft(z, lam * alpha) / (v + 2.0 * lam * (1.0 - alpha))
    if fam == 2:
        return _mcp_update(z, v, lam, gamma)
    if fam == 3:
        az = abs(z)
        if az <= lam * (1.0 + v):
            return _soft(z, lam) / v
        if az <= v * gamma * lam:
            return _soft(z, gamma * lam / (gamma - 1.0)) / (v - 1.0 / (gamma - 1.0))
        return z / v
    return _mcp_update(z, v + 2.0 * lam * (1.0 - alpha), lam * alpha, gamma)


@njit(cache=True, nogil=True)
def _mcp_pen(a, lam, gamma):
    if a <= gamma * lam:
        return lam * a - a * a / (2.0 * gamma)
    return 0.5 * gamma * lam * lam


@njit(cache=True, nogil=True)
def _pen(b, fam, lam, gamma, alpha):
    a = abs(b)
    if fam == 0:
        return lam * a
    if fam == 1:
        return lam * alpha * a + lam * (1.0 - alpha) * a * a
    if fam == 2:
        return _mcp_pen(a, lam, gamma)
    if fam == 3:
        if a <= lam:
            return lam * a
        if a <= gamma * lam:
            return (2.0 * gamma * lam * a - a * a - lam * lam) / (2.0 * (gamma - 1.0))
        return 0.5 * lam * lam * (gamma + 1.0)
    return _mcp_pen(a, lam * alpha, gamma) + lam * (1.0 - alpha) * a * a


@njit(cache=True, nogil=True)
def _objective(r, beta, n_scale, fam, lam, gamma, alpha):
    s = 0.0
    for i in range(r.shape[0]):
        s += r[i] * r[i]
    s /= 2.0 * n_scale
    for j in range(beta.shape[0]):
        if beta[j] != 0.0:
            s += _pen(beta[j], fam, lam, gamma, alpha)
    return s


@njit(cache=True, nogil=True)
def _sweep(Xt, r, beta, v, idx, m, n_scale, fam, lam, gamma, alpha):
    n = r.shape[0]
    delta = 0.0
    for k in range(m):
        j = idx[k]
        if v[j] == 0.0:
            continue
        old = beta[j]
        z = 0.0
        for i in range(n):
            z += Xt[j, i] * r[i]
        z = z / n_scale + v[j] * old
        new = _update(z, v[j], fam, lam, gamma, alpha)
        if new != old:
            d = new - old
            for i in range(n):
                r[i] -= d * Xt[j, i]
            beta[j] = new
            if abs(d) > delta:
                delta = abs(d)
    return delta


@njit(cache=True, nogil=True)
def _cd(Xt, y, beta, fam, lam, gamma, alpha, n_scale, tol, max_iter, monitor):
    p, n = Xt.shape
    v = np.empty(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += Xt[j, i] * Xt[j, i]
        v[j] = s / n_scale
    r = y.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for i in range(n):
                r[i] -= beta[j] * Xt[j, i]
    everything = np.arange(p)
    active = np.empty(p, dtype=np.int64)
    history = np.empty(max_iter + 1)
    prev = _objective(r, beta, n_scale, fam, lam, gamma, alpha)
    history[0] = prev
    it = 0
    converged = False
    diverged = False
    while it < max_iter:
        delta = _sweep(Xt, r, beta, v, everything, p, n_scale, fam, lam, gamma, alpha)
        it += 1
        obj = _objective(r, beta, n_scale, fam, lam, gamma, alpha)
        history[it] = obj
        if monitor and obj > prev + 1e-6 * max(1.0, abs(prev)):
            diverged = True
            break
        prev = obj
        if delta < tol:
            converged = True
            break
        m = 0
        for j in range(p):
            if beta[j] != 0.0:
                active[m] = j
                m += 1
        while it < max_iter:
            delta = _sweep(Xt, r, beta, v, active, m, n_scale, fam, lam, gamma, alpha)
            it += 1
            obj = _objective(r, beta, n_scale, fam, lam, gamma, alpha)
            history[it] = obj
            if monitor and obj > prev + 1e-6 * max(1.0, abs(prev)):
                diverged = True
                break
            prev = obj
            if delta < tol:
                break
        if diverged:
            break
    return beta, it, converged, diverged, prev, history[: it + 1]


# ---------------------------------------------------------------- public API

def soft_threshold(r: float, lam: float) -> float:
    """sign(r) * max(|r| - lam, 0)."""
    if lam < 0:
        raise InvalidPenalty(f"threshold must be nonnegative, got {lam}")
    return float(_soft(float(r), float(lam)))


def mcp_threshold(r: float, lam: float, gamma: float) -> float:
    """Minimizer of 1/2 (z - r)^2 + MCP(|z|) for unit curvature."""
    if not gamma > 1:
        raise InvalidGamma(f"mcp threshold needs gamma > 1, got {gamma}")
    return float(_mcp_update(float(r), 1.0, float(lam), float(gamma)))


def scad_threshold(r: float, lam: float, gamma: float) -> float:
    """Minimizer of 1/2 (z - r)^2 + SCAD(|z|) for unit curvature."""
    if not gamma > 2:
        raise InvalidGamma(f"scad threshold needs gamma > 2, got {gamma}")
    return float(_update(float(r), 1.0, _SCAD, float(lam), float(gamma), 1.0))


def coordinate_update(z, v, spec: PenaltySpec) -> float:
    """Exact minimizer of v/2 b^2 - z b + pen(|b|) for the given penalty."""
    return float(_update(float(z), float(v), _CODE[spec.family], spec.lam, spec.gamma, spec.alpha))


def penalty_value(beta, spec: PenaltySpec) -> float:
    fam = _CODE[spec.family]
    return float(sum(_pen(float(b), fam, spec.lam, spec.gamma, spec.alpha) for b in np.ravel(beta)))


def objective(X, y, spec: PenaltySpec, beta, n_scale=None) -> float:
    """(1/2n) ||y - X beta||^2 + sum_j pen(|beta_j|).

    ``n_scale`` overrides n in the loss scaling (used for augmented designs,
    whose extra rows must not change the normalization).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if X.shape[0] != y.shape[0] or X.shape[1] != beta.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, y {y.shape}, beta {beta.shape}")
    n = X.shape[0] if n_scale is None else n_scale
    r = y - X @ beta
    return float(r @ r / (2.0 * n) + penalty_value(beta, spec))


@njit(cache=True, nogil=True)
def _max_corr(Xt, y, n_scale):
    best = 0.0
    for j in range(Xt.shape[0]):
        z = 0.0
        for i in range(y.shape[0]):
            z += Xt[j, i] * y[i]
        z = abs(z / n_scale)
        if z > best:
            best = z
    return best


def lambda_max(X, y, n_scale=None) -> float:
    """Smallest lambda with an all-zero lasso solution, max_j |X_j'y| / n.

    Summed in the same order as the coordinate-descent kernel, so a fit at
    exactly this value returns exact zeros.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.size == 0:
        return 0.0
    n = X.shape[0] if n_scale is None else n_scale
    return float(_max_corr(np.ascontiguousarray(X.T), np.asarray(y, dtype=float).ravel(), float(n)))


def lambda_path(data, n_lambda: int = 50, min_ratio: float = 0.01, alpha: float = 1.0):
    """Log-spaced descending lambda grid from lambda_max to min_ratio * lambda_max.

    ``alpha`` divides lambda_max for penalties whose L1 part is lambda * alpha.
    """
    if data.n == 0 or data.p == 0:
        raise EmptyData("empty design")
    if n_lambda < 1 or not 0 < min_ratio < 1:
        raise InvalidPenalty(f"bad path settings n_lambda={n_lambda}, min_ratio={min_ratio}")
    lmax = lambda_max(data.X, data.y) / alpha
    if not lmax > 0:
        raise EmptyData("lambda_max is zero (y orthogonal to every column); no path exists")
    if n_lambda == 1:
        return np.array([lmax])
    return lmax * np.logspace(0.0, np.log10(min_ratio), n_lambda)


def cd_fit(X, y, spec: PenaltySpec, init=None, tol: float = DEFAULT_TOL,
           max_iter: int = DEFAULT_MAX_ITER, n_scale=None, record: bool = False) -> FitResult:
    """Cyclic coordinate descent with an active-set inner loop.

    After each full sweep the nonzero coordinates are iterated on their own
    until they settle, then another full sweep looks for violators. Stops when
    the largest coordinate change of a full sweep drops below ``tol``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows but y has {y.shape[0]}")
    if not tol > 0:
        raise InvalidPenalty(f"tol must be positive, got {tol}")
    beta = np.zeros(p) if init is None else np.array(init, dtype=float).ravel()
    if beta.shape[0] != p:
        raise DimensionMismatch(f"init has length {beta.shape[0]}, expected {p}")
    n_scale = float(n if n_scale is None else n_scale)
    Xt = np.ascontiguousarray(X.T)
    if spec.family in ("mcp", "mnet", "scad") and p:
        v = (Xt ** 2).sum(axis=1) / n_scale
        v_min = float(v[v > 0].min(initial=np.inf))
        # each coordinate subproblem must stay strictly convex
        slack = v_min * (spec.gamma - 1.0) if spec.family == "scad" else v_min * spec.gamma
        if not slack > 1.0:
            raise InvalidGamma(f"gamma={spec.gamma} too small for column curvature {v_min:.3g}")
    beta, it, converged, diverged, obj, hist = _cd(
        Xt, y, beta, _CODE[spec.family], spec.lam, spec.gamma, spec.alpha,
        n_scale, float(tol), int(max_iter), spec.convex)
    if diverged:
        raise Diverged(f"objective increased during {spec.family} coordinate descent")
    if not converged:
        warnings.warn(f"coordinate descent hit max_iter={max_iter} before converging",
                      RuntimeWarning, stacklevel=2)
    return FitResult(beta, int(it), float(obj), bool(converged),
                     history=hist.copy() if record else None)


def kkt_residual(X, y, beta, lam, n_scale=None) -> float:
    """Largest violation of the lasso optimality conditions at ``beta``."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0] if n_scale is None else n_scale
    g = X.T @ (np.asarray(y, dtype=float) - X @ beta) / n
    on = beta != 0
    res_on = np.abs(g[on] - lam * np.sign(beta[on]))
    res_off = np.maximum(np.abs(g[~on]) - lam, 0.0)
    return float(max(res_on.max(initial=0.0), res_off.max(initial=0.0)))
