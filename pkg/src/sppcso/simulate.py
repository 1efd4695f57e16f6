"""Synthetic designs with a 15-variable true support.

example1: two independent AR(1) blocks with correlation 0.95^|j-k|, the first
holding the 15 signals.
example2: three groups of five near-copies of a latent N(0, 1) factor
(within-group noise variance 0.01), followed by p - 15 background columns with
AR(1) (or compound-symmetric) correlation rho.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimensions
from .linalg import Dataset, standardize

N_SIGNAL = 15
SIGNAL_LOW, SIGNAL_HIGH = 2.0, 3.0
BLOCK_RHO = 0.95
GROUP_NOISE_VAR = 0.01


@dataclass(frozen=True)
class SimulatedDataset:
    data: Dataset
    raw: Dataset
    beta_true: np.ndarray
    support_true: np.ndarray
    scenario: str
    param: float
    seed: object

    @property
    def beta_true_std(self):
        """True coefficients on the standardized column scale."""
        return self.beta_true * self.data.column_scales


def ar1_cov(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def cs_cov(p, rho):
    S = np.full((p, p), rho)
    np.fill_diagonal(S, 1.0)
    return S


def _mvn(rng, n, cov):
    L = np.linalg.cholesky(cov)
    return rng.standard_normal((n, cov.shape[0])) @ L.T


def _signal(rng, p):
    beta = np.zeros(p)
    beta[:N_SIGNAL] = rng.uniform(SIGNAL_LOW, SIGNAL_HIGH, N_SIGNAL)
    return beta


def _finish(X, beta, noise, scenario, param, seed):
    raw = Dataset(X, X @ beta + noise)
    return SimulatedDataset(standardize(raw), raw, beta, np.arange(N_SIGNAL),
                            scenario, float(param), seed)


def gen_example1(n, p, sigma, seed) -> SimulatedDataset:
    if p <= N_SIGNAL or n < 2:
        raise BadDimensions(f"example1 needs p >= 16 and n >= 2, got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    beta = _signal(rng, p)
    X = np.hstack([_mvn(rng, n, ar1_cov(N_SIGNAL, BLOCK_RHO)),
                   _mvn(rng, n, ar1_cov(p - N_SIGNAL, BLOCK_RHO))])
    noise = sigma * rng.standard_normal(n)
    return _finish(X, beta, noise, "example1", sigma, seed)


def gen_example2(n, p, rho, seed, sigma=1.0, background="ar1") -> SimulatedDataset:
    if p <= N_SIGNAL or n < 2:
        raise BadDimensions(f"example2 needs p >= 16 and n >= 2, got n={n}, p={p}")
    if background not in ("ar1", "cs"):
        raise ValueError(f"background must be 'ar1' or 'cs', got {background!r}")
    rng = np.random.default_rng(seed)
    beta = _signal(rng, p)
    latent = rng.standard_normal((n, 3))
    groups = np.repeat(latent, 5, axis=1) + np.sqrt(GROUP_NOISE_VAR) * rng.standard_normal((n, N_SIGNAL))
    cov = ar1_cov(p - N_SIGNAL, rho) if background == "ar1" else cs_cov(p - N_SIGNAL, rho)
    X = np.hstack([groups, _mvn(rng, n, cov)])
    noise = sigma * rng.standard_normal(n)
    return _finish(X, beta, noise, "example2", rho, seed)
