"""Thin adaptive-quadrature wrapper with an explicit failure contract.

Every integral in the package goes through :func:`integrate`, so tolerance
and budget semantics live in exactly one place.  The engine is QUADPACK via
``scipy.integrate.quad``; the budget is expressed in integrand evaluations
and mapped onto the subinterval limit (each QAGS subinterval costs 21
evaluations).
"""
from __future__ import annotations

import math
import warnings

from scipy import integrate as _si

__all__ = ["QuadratureError", "integrate"]

DEFAULT_TOL = 1e-10
DEFAULT_BUDGET = 100_000

# reported error above max(100*tol, _ERR_FLOOR) counts as non-convergence
_ERR_FLOOR = 5e-13


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, msg, value=None, error=None):
        super().__init__(msg)
        self.value = value
        self.error = error


def _quad_piece(f, a, b, tol, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _si.IntegrationWarning)
        val, err = _si.quad(f, a, b, epsabs=tol, epsrel=max(tol, 1e-12),
                            limit=limit)
    return val, err


def integrate(f, a, b, *, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, points=None):
    """Integrate ``f`` over ``(a, b)``, splitting at interior ``points``.

    Raises :class:`QuadratureError` when the estimated absolute error stays
    above ``max(100*tol, 5e-13)`` after the evaluation budget, or when the
    result is not finite.
    """
    limit = max(10, int(budget) // 21)
    cuts = [a]
    if points:
        cuts.extend(p for p in sorted(points) if a < p < b)
    cuts.append(b)
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _quad_piece(f, lo, hi, tol, limit)
        total += val
        total_err += err
    if not math.isfinite(total) or total_err > max(100.0 * tol, _ERR_FLOOR):
        raise QuadratureError(
            f"quadrature non-convergence on ({a}, {b}): "
            f"value={total!r} est_error={total_err:.3e} tol={tol:.3e}",
            value=total, error=total_err)
    return total
