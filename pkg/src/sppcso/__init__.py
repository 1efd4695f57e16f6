"""Penalized regression with principal-component-informed shrinkage (SPPCSO)."""

__version__ = "0.1.0"

from .errors import SppcsoError
from .estimator import (build_augmentation, penalty_diag, shrinkage_factor, sppcr_estimate,
                        sppcso_fit)
from .linalg import Dataset, standardize, sym_eigen
from .methods import METHODS, fit_method, fit_path
from .selection import cross_validate, kfold_split, theta_grid
from .solvers import FitResult, PenaltySpec, cd_fit, lambda_path, soft_threshold

__all__ = [
    "Dataset", "FitResult", "METHODS", "PenaltySpec", "SppcsoError", "build_augmentation",
    "cd_fit", "cross_validate", "fit_method", "fit_path", "kfold_split", "lambda_path",
    "penalty_diag", "shrinkage_factor", "soft_threshold", "sppcr_estimate", "sppcso_fit",
    "standardize", "sym_eigen", "theta_grid",
]
