"""Scikit-learn style front end for the linear record estimators.

The heavy lifting (moment tables, linear solves) happens once in `fit`;
`predict` is then a pair of dot products per row, so scoring large batches
of record paths is cheap.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._quad import DEFAULT_TOL
from .distributions import make_family, reflect
from .moments import pm_moments_table
from .solvers import solve_blie, solve_blue

__all__ = ["PartialMaximaEstimator", "check_partial_maxima"]


def check_partial_maxima(X, direction: str = "maxima") -> np.ndarray:
    """Validate a batch of record paths: 2D, finite, monotone rows."""
    X = check_array(X, dtype=np.float64, ensure_min_features=2)
    steps = np.diff(X, axis=1)
    if direction == "maxima":
        bad = (steps < 0.0).any(axis=1)
        word = "non-decreasing"
    elif direction == "minima":
        bad = (steps > 0.0).any(axis=1)
        word = "non-increasing"
    else:
        raise ValueError(f"direction must be maxima or minima, got "
                         f"{direction!r}")
    if bad.any():
        raise ValueError(f"row {int(np.flatnonzero(bad)[0])} is not "
                         f"{word}; not a valid record path")
    return X


class PartialMaximaEstimator(TransformerMixin, BaseEstimator):
    """Joint location/scale estimation from partial maxima (or minima).

    Parameters
    ----------
    family : str
        Parent distribution family name, e.g. "uniform", "weibull".
    shape_params : dict, optional
        Shape parameters for the family, e.g. {"c": 2.0}.
    kind : {"blue", "blie"}
        Minimum-variance unbiased coefficients, or the minimum-MSE
        shrinkage variant.
    direction : {"maxima", "minima"}
        Whether rows of X are running maxima or running minima.
    tol : float
        Quadrature tolerance for the moment tables.

    Attributes set by fit: `location_solution_`, `scale_solution_`
    (coefficient vectors with their risk numbers), `n_features_in_`.
    """

    def __init__(self, family: str = "uniform",
                 shape_params: Optional[dict] = None, kind: str = "blue",
                 direction: str = "maxima", tol: float = DEFAULT_TOL):
        self.family = family
        self.shape_params = shape_params
        self.kind = kind
        self.direction = direction
        self.tol = tol

    def fit(self, X, y=None):
        """Solve the coefficient systems for paths of X's length."""
        if self.kind not in ("blue", "blie"):
            raise ValueError(f"kind must be blue or blie, got {self.kind!r}")
        X = check_partial_maxima(X, self.direction)
        spec = make_family(self.family, **(self.shape_params or {}))
        work = spec if self.direction == "maxima" else reflect(spec)
        pm = pm_moments_table(work, X.shape[1], tol=self.tol)
        solver = solve_blue if self.kind == "blue" else solve_blie
        loc, scale = solver(pm, family=work.name)
        self.location_solution_ = loc
        self.scale_solution_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Per-row (theta1, theta2) estimates, shape (n_samples, 2)."""
        check_is_fitted(self, "location_solution_")
        X = check_partial_maxima(X, self.direction)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"paths have length {X.shape[1]}, fitted for "
                             f"{self.n_features_in_}")
        loc = X @ self.location_solution_.coefficients
        scale = X @ self.scale_solution_.coefficients
        if self.direction == "minima":
            # solved on the reflection: location flips twice, scale once
            scale = -scale
        return np.column_stack([loc, scale])

    def transform(self, X) -> np.ndarray:
        """Standardize each path by its own estimated (theta1, theta2)."""
        theta = self.predict(X)
        X = check_array(X, dtype=np.float64)
        return (X - theta[:, :1]) / theta[:, 1:]
