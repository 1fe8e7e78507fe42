"""Best linear unbiased / invariant estimation from partial maxima.

Given the standardized moment tables (mu, Sigma, E = Sigma + mu mu' on the
partial maxima basis; m, S, D = S + mm' on the spacings basis), location and
scale estimators are linear forms whose coefficient vectors solve small
symmetric positive definite systems:

  BLUE:  with w1 = Sigma^-1 1, wm = Sigma^-1 mu, A = 1'w1, B = mu'wm,
         C = 1'wm, Delta = AB - C^2:
            location  (B w1 - C wm)/Delta   Var = B/Delta
            scale     (A wm - C w1)/Delta   Var = A/Delta
  BLIE:  with v1 = E^-1 1, vm = E^-1 mu, A_E = 1'v1, C_E = 1'vm,
         B_E = mu'vm, D_E = A_E B_E - C_E^2:
            location  v1/A_E                MSE = 1/A_E
            scale     vm - (C_E/A_E) v1     MSE = 1 - D_E/A_E
  spacings (scale only; shift invariance is structural):
            BLUE  S^-1 m / q,  q = m'S^-1 m,   Var = 1/q
            BLIE  D^-1 m,      a = m'D^-1 m = q/(1+q),  MSE = 1 - a
            simple  b_k = (m_k/s_k^2)/c, c = sum m_k^2/s_k^2,
                    exact Var = b'Sb, with 1/c as the independence bound

Variances and MSEs are reported in units of theta2^2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg as _la

from .moments import PartialMaximaMoments, SpacingMoments

__all__ = [
    "EstimatorSolution",
    "IllConditionedWarning",
    "solve_blue",
    "solve_blie",
    "solve_blue_spacings",
    "solve_blie_spacings",
    "simple_scale_estimator",
    "to_partial_maxima_basis",
    "evaluate",
]

KINDS = ("blue_location", "blue_scale", "blie_location", "blie_scale",
         "simple_scale")
BASES = ("partial_maxima", "spacings")

CONDITION_WARN_THRESHOLD = 1e12


class IllConditionedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EstimatorSolution:
    """Coefficient vector of a linear estimator plus its exact risk."""

    kind: str
    basis: str
    coefficients: np.ndarray
    n: int
    family: Optional[str] = None
    theoretical_variance: Optional[float] = None
    theoretical_mse: Optional[float] = None
    delta: Optional[float] = None
    blie_ratio_a: Optional[float] = None
    variance_bound: Optional[float] = None
    condition_estimate: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        expected = self.n if self.basis == "partial_maxima" else self.n - 1
        if self.coefficients.shape != (expected,):
            raise ValueError(
                f"{self.kind} on {self.basis} needs {expected} coefficients, "
                f"got {self.coefficients.shape}")
        self.coefficients.setflags(write=False)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "basis": self.basis, "n": self.n,
               "coefficients": [float(c) for c in self.coefficients]}
        for key in ("family", "theoretical_variance", "theoretical_mse",
                    "delta", "blie_ratio_a", "variance_bound",
                    "condition_estimate"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EstimatorSolution":
        data = dict(data)
        coeffs = np.asarray(data.pop("coefficients"), dtype=float)
        return cls(coefficients=coeffs, **data)


def _chol_solve(mat: np.ndarray, rhs: np.ndarray, what: str):
    """Solve mat @ x = rhs for an SPD mat; returns (x, condition estimate)."""
    mat = np.asarray(mat, dtype=float)
    anorm = np.linalg.norm(mat, 1)
    try:
        c, low = _la.cho_factor(mat, check_finite=False)
        x = _la.cho_solve((c, low), rhs, check_finite=False)
        rcond, info = _la.lapack.dpocon(c, anorm)
        cond = 1.0 / rcond if (info == 0 and rcond > 0.0) else math.inf
    except _la.LinAlgError:
        # moment matrices are SPD in exact arithmetic; fall back to a
        # symmetric-indefinite solve when roundoff spoils the factorization
        x = _la.solve(mat, rhs, assume_a="sym", check_finite=False)
        cond = float(np.linalg.cond(mat, 1))
    if cond > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"{what} matrix condition estimate {cond:.3e}; coefficients "
            "may lose accuracy", IllConditionedWarning, stacklevel=3)
    return x, cond


def solve_blue(pm: PartialMaximaMoments, family: Optional[str] = None):
    """(location, scale) BLUE pair on the partial maxima basis."""
    n = pm.n
    ones = np.ones(n)
    sol, cond = _chol_solve(pm.sigma, np.column_stack([ones, pm.mu]),
                            "covariance")
    w1, wm = sol[:, 0], sol[:, 1]
    a = float(ones @ w1)
    b = float(pm.mu @ wm)
    c = float(ones @ wm)
    delta = a * b - c * c
    if delta <= 0.0 or a <= 0.0 or b <= 0.0:
        raise ArithmeticError(
            f"degenerate design: A={a:.6g} B={b:.6g} Delta={delta:.6g}")
    loc = EstimatorSolution(
        kind="blue_location", basis="partial_maxima", n=n, family=family,
        coefficients=(b * w1 - c * wm) / delta,
        theoretical_variance=b / delta, delta=delta, condition_estimate=cond)
    scale = EstimatorSolution(
        kind="blue_scale", basis="partial_maxima", n=n, family=family,
        coefficients=(a * wm - c * w1) / delta,
        theoretical_variance=a / delta, delta=delta, condition_estimate=cond)
    return loc, scale


def solve_blie(pm: PartialMaximaMoments, family: Optional[str] = None):
    """(location, scale) best linear invariant pair; risks are MSEs."""
    n = pm.n
    ones = np.ones(n)
    sol, cond = _chol_solve(pm.second_moment,
                            np.column_stack([ones, pm.mu]), "second-moment")
    v1, vm = sol[:, 0], sol[:, 1]
    a_e = float(ones @ v1)
    c_e = float(ones @ vm)
    b_e = float(pm.mu @ vm)
    if a_e <= 0.0:
        raise ArithmeticError(f"degenerate second-moment matrix: A_E={a_e:.6g}")
    d_e = a_e * b_e - c_e * c_e
    loc = EstimatorSolution(
        kind="blie_location", basis="partial_maxima", n=n, family=family,
        coefficients=v1 / a_e, theoretical_mse=1.0 / a_e,
        condition_estimate=cond)
    scale = EstimatorSolution(
        kind="blie_scale", basis="partial_maxima", n=n, family=family,
        coefficients=vm - (c_e / a_e) * v1,
        theoretical_mse=1.0 - d_e / a_e, condition_estimate=cond)
    return loc, scale


def solve_blue_spacings(sm: SpacingMoments,
                        family: Optional[str] = None) -> EstimatorSolution:
    """Scale BLUE from spacings: S^-1 m / q with Var = 1/q."""
    w, cond = _chol_solve(sm.s_mat, sm.m, "spacing covariance")
    q = float(sm.m @ w)
    if q <= 0.0:
        raise ArithmeticError(f"nonpositive quadratic form q={q:.6g}")
    return EstimatorSolution(
        kind="blue_scale", basis="spacings", n=sm.n, family=family,
        coefficients=w / q, theoretical_variance=1.0 / q,
        condition_estimate=cond)


def solve_blie_spacings(sm: SpacingMoments,
                        family: Optional[str] = None) -> EstimatorSolution:
    """Scale BLIE from spacings: D^-1 m with MSE = 1 - a, a = m'D^-1 m."""
    b, cond = _chol_solve(sm.d_mat, sm.m, "spacing second-moment")
    a = float(sm.m @ b)
    if not 0.0 < a < 1.0:
        raise ArithmeticError(f"shrinkage factor a={a:.6g} outside (0,1)")
    return EstimatorSolution(
        kind="blie_scale", basis="spacings", n=sm.n, family=family,
        coefficients=b, theoretical_mse=1.0 - a, blie_ratio_a=a,
        condition_estimate=cond)


def simple_scale_estimator(sm: SpacingMoments,
                           family: Optional[str] = None) -> EstimatorSolution:
    """Diagonal-weight scale estimator b_k proportional to m_k/s_k^2.

    Ignores spacing correlations, so it needs only the means and the
    diagonal of S.  Reports the exact variance b'Sb together with the
    independence bound 1/c, c = sum m_k^2/s_k^2.
    """
    s_diag = np.diag(sm.s_mat)
    if np.any(s_diag <= 0.0):
        raise ArithmeticError("nonpositive spacing variance")
    ratios = sm.m / s_diag
    c = float(sm.m @ ratios)
    b = ratios / c
    return EstimatorSolution(
        kind="simple_scale", basis="spacings", n=sm.n, family=family,
        coefficients=b, theoretical_variance=float(b @ sm.s_mat @ b),
        variance_bound=1.0 / c)


def to_partial_maxima_basis(sol: EstimatorSolution) -> EstimatorSolution:
    """Rewrite sum b_k Z_k as sum c_i X*_i via c_i = b_{i-1} - b_i."""
    if sol.basis != "spacings":
        raise ValueError("solution is already on the partial maxima basis")
    b = np.concatenate([[0.0], sol.coefficients, [0.0]])
    return EstimatorSolution(
        kind=sol.kind, basis="partial_maxima", n=sol.n, family=sol.family,
        coefficients=b[:-1] - b[1:],
        theoretical_variance=sol.theoretical_variance,
        theoretical_mse=sol.theoretical_mse, delta=sol.delta,
        blie_ratio_a=sol.blie_ratio_a, variance_bound=sol.variance_bound,
        condition_estimate=sol.condition_estimate)


def evaluate(sol: EstimatorSolution, x) -> float:
    """Apply the estimator to one observed partial maxima path."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sol.n,):
        raise ValueError(f"expected {sol.n} partial maxima, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("partial maxima contain non-finite values")
    if np.any(np.diff(x) < 0.0):
        raise ValueError("partial maxima must be non-decreasing")
    if sol.basis == "spacings":
        return float(sol.coefficients @ np.diff(x))
    return float(sol.coefficients @ x)
