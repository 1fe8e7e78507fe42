"""Distribution abstraction and the built-in generating families.

A :class:`DistributionSpec` bundles the cdf/density/quantile of a parameter-
free generating d.f. F together with the analytic metadata the numerical
layers need (log tails, density derivative, stable deep-tail quantiles).
Specs are immutable and safe to share across threads.

Shipped families: power (uniform at lambda=1), logistic, pareto, negexp,
weibull, gumbel, normal, an upper-endpoint-atom variant of the uniform, and
two piecewise C^1 families with finite limiting Fisher information (one
supported on (0, inf) for minima, its reflection on (-inf, 0) for maxima).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import optimize as _opt
from scipy import special as _sp

__all__ = [
    "DistributionSpec",
    "make_family",
    "reflect",
    "log_concavity_probe",
    "parse_family",
    "FAMILY_NAMES",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# --- exact constants of the finite-Fisher-information family -------------
# Closed forms chosen so the two branches match value, slope and curvature
# at the knot s = e^-2 (F(s)=1/3, F'(s)=e^2/9, F''(s)=-e^4/27).
_S_KNOT = math.exp(-2.0)
_CE_A = math.exp(math.exp(-2.0)) * (18.0 - 6.0 * math.e**2 + math.e**4) / 54.0
_CE_B = -2.0 / 27.0 * math.exp(-2.0 + math.exp(-2.0)) * (
    9.0 - 12.0 * math.e**2 + 2.0 * math.e**4)
_CE_C = math.exp(-4.0 + math.exp(-2.0)) * (
    18.0 - 42.0 * math.e**2 + 43.0 * math.e**4) / 54.0


@dataclass(frozen=True)
class DistributionSpec:
    """A generating distribution function with numeric metadata.

    ``cdf``/``quantile`` are mandatory; ``density`` is absent where F has an
    atom.  Optional callables are pure accuracy helpers: ``log_sf``/
    ``log_cdf``/``log_pdf`` avoid cancellation in the tails,
    ``tail_quantile(eps)`` evaluates F^-1(1-eps) for eps far below float
    resolution of ``1-eps``, ``cdf_left_limit`` gives F(x-) at jump points.
    ``breakpoints`` are interior knots quadrature should split at.
    """

    name: str
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]
    lower_endpoint: float
    upper_endpoint: float
    shape_params: dict = field(default_factory=dict)
    density: Optional[Callable[[float], float]] = None
    density_derivative: Optional[Callable[[float], float]] = None
    log_sf: Optional[Callable[[float], float]] = None
    log_cdf: Optional[Callable[[float], float]] = None
    log_pdf: Optional[Callable[[float], float]] = None
    tail_quantile: Optional[Callable[[float], float]] = None
    cdf_left_limit: Optional[Callable[[float], float]] = None
    atom_at_upper_endpoint: Optional[float] = None
    breakpoints: tuple = ()

    def cache_key(self):
        return (self.name, tuple(sorted(self.shape_params.items())))

    @property
    def has_atom(self) -> bool:
        return bool(self.atom_at_upper_endpoint)

    def sf(self, x):
        """1 - F(x), through the log form when available."""
        if self.log_sf is not None:
            return math.exp(self.log_sf(x))
        return 1.0 - self.cdf(x)

    def quantile_upper(self, eps):
        """F^-1(1 - eps), stable for tiny eps."""
        if self.tail_quantile is not None:
            return self.tail_quantile(eps)
        return self.quantile(1.0 - eps)

    def __repr__(self):  # params in the CLI grammar, handy in test output
        if self.shape_params:
            kv = ",".join(f"{k}={v:g}" for k, v in sorted(self.shape_params.items()))
            return f"<DistributionSpec {self.name}:{kv}>"
        return f"<DistributionSpec {self.name}>"


# -------------------------------------------------------------------------
# family builders
# -------------------------------------------------------------------------

def _power(lam: float, name="power") -> DistributionSpec:
    if not (lam > 0.0):
        raise ValueError(f"power family needs shape lambda > 0, got {lam}")
    inv = 1.0 / lam

    def cdf(x):
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return x ** lam

    def density(x):
        if 0.0 < x < 1.0:
            return lam * x ** (lam - 1.0)
        return 0.0

    def ddensity(x):
        if 0.0 < x < 1.0:
            return lam * (lam - 1.0) * x ** (lam - 2.0)
        return 0.0

    return DistributionSpec(
        name=name,
        shape_params={} if name == "uniform" else {"lambda": lam},
        cdf=cdf,
        density=density,
        density_derivative=ddensity,
        quantile=lambda u: u ** inv,
        log_sf=lambda x: math.log1p(-(x ** lam)),
        log_cdf=lambda x: lam * math.log(x),
        log_pdf=lambda x: math.log(lam) + (lam - 1.0) * math.log(x),
        tail_quantile=lambda eps: math.exp(math.log1p(-eps) * inv),
        lower_endpoint=0.0,
        upper_endpoint=1.0,
    )


def _logistic() -> DistributionSpec:
    def density(x):
        t = math.exp(-abs(x))
        return t / (1.0 + t) ** 2

    def ddensity(x):
        f = density(x)
        return f * (1.0 - 2.0 * _sp.expit(x))

    return DistributionSpec(
        name="logistic",
        cdf=lambda x: float(_sp.expit(x)),
        density=density,
        density_derivative=ddensity,
        quantile=lambda u: float(_sp.logit(u)),
        log_sf=lambda x: -float(np.logaddexp(0.0, x)),
        log_cdf=lambda x: -float(np.logaddexp(0.0, -x)),
        log_pdf=lambda x: -abs(x) - 2.0 * float(np.logaddexp(0.0, -abs(x))),
        tail_quantile=lambda eps: math.log1p(-eps) - math.log(eps),
        lower_endpoint=-math.inf,
        upper_endpoint=math.inf,
    )


def _pareto(a: float) -> DistributionSpec:
    # a <= 2 has infinite variance, outside the model's standing assumptions
    if not (a > 2.0):
        raise ValueError(f"pareto family needs shape a > 2 (finite variance), got {a}")

    def cdf(x):
        if x <= 1.0:
            return 0.0
        return -math.expm1(-a * math.log(x))

    def density(x):
        return a * x ** (-a - 1.0) if x > 1.0 else 0.0

    return DistributionSpec(
        name="pareto",
        shape_params={"a": a},
        cdf=cdf,
        density=density,
        density_derivative=lambda x: (-a * (a + 1.0) * x ** (-a - 2.0)
                                      if x > 1.0 else 0.0),
        quantile=lambda u: math.exp(-math.log1p(-u) / a),
        log_sf=lambda x: -a * math.log(x),
        log_pdf=lambda x: math.log(a) - (a + 1.0) * math.log(x),
        tail_quantile=lambda eps: eps ** (-1.0 / a),
        lower_endpoint=1.0,
        upper_endpoint=math.inf,
    )


def _negexp() -> DistributionSpec:
    def cdf(x):
        return math.exp(x) if x < 0.0 else 1.0

    return DistributionSpec(
        name="negexp",
        cdf=cdf,
        density=lambda x: math.exp(x) if x < 0.0 else 0.0,
        density_derivative=lambda x: math.exp(x) if x < 0.0 else 0.0,
        quantile=lambda u: math.log(u),
        log_cdf=lambda x: min(x, 0.0),
        log_sf=lambda x: math.log(-math.expm1(x)) if x < 0.0 else -math.inf,
        log_pdf=lambda x: x,
        tail_quantile=lambda eps: math.log1p(-eps),
        lower_endpoint=-math.inf,
        upper_endpoint=0.0,
    )


def _weibull(c: float) -> DistributionSpec:
    if not (c > 0.0):
        raise ValueError(f"weibull family needs shape c > 0, got {c}")

    def cdf(x):
        return -math.expm1(-(x ** c)) if x > 0.0 else 0.0

    def density(x):
        if x <= 0.0:
            return 0.0
        return c * x ** (c - 1.0) * math.exp(-(x ** c))

    def ddensity(x):
        if x <= 0.0:
            return 0.0
        return c * x ** (c - 2.0) * math.exp(-(x ** c)) * ((c - 1.0) - c * x ** c)

    return DistributionSpec(
        name="weibull",
        shape_params={"c": c},
        cdf=cdf,
        density=density,
        density_derivative=ddensity,
        quantile=lambda u: (-math.log1p(-u)) ** (1.0 / c),
        log_sf=lambda x: -(x ** c),
        log_pdf=lambda x: math.log(c) + (c - 1.0) * math.log(x) - x ** c,
        tail_quantile=lambda eps: (-math.log(eps)) ** (1.0 / c),
        lower_endpoint=0.0,
        upper_endpoint=math.inf,
    )


def _gumbel() -> DistributionSpec:
    def log_sf(x):
        if x <= -700.0:
            return 0.0  # F(x) ~ 0
        t = math.exp(-x)
        return math.log(-math.expm1(-t)) if t > 0.0 else -x

    def cdf(x):
        return math.exp(-math.exp(-x)) if x > -700.0 else 0.0

    def density(x):
        if x <= -700.0:
            return 0.0
        return math.exp(-x - math.exp(-x))

    return DistributionSpec(
        name="gumbel",
        cdf=cdf,
        density=density,
        density_derivative=lambda x: (density(x) * (math.exp(-x) - 1.0)
                                      if x > -700.0 else 0.0),
        quantile=lambda u: -math.log(-math.log(u)),
        log_cdf=lambda x: -math.exp(-x) if x > -700.0 else -math.inf,
        log_sf=log_sf,
        log_pdf=lambda x: -x - math.exp(-x),
        tail_quantile=lambda eps: -math.log(-math.log1p(-eps)),
        lower_endpoint=-math.inf,
        upper_endpoint=math.inf,
    )


def _normal() -> DistributionSpec:
    return DistributionSpec(
        name="normal",
        cdf=lambda x: float(_sp.ndtr(x)),
        density=lambda x: math.exp(-0.5 * x * x) / _SQRT_2PI,
        density_derivative=lambda x: -x * math.exp(-0.5 * x * x) / _SQRT_2PI,
        quantile=lambda u: float(_sp.ndtri(u)),
        log_sf=lambda x: float(_sp.log_ndtr(-x)),
        log_cdf=lambda x: float(_sp.log_ndtr(x)),
        log_pdf=lambda x: -0.5 * x * x - math.log(_SQRT_2PI),
        tail_quantile=lambda eps: float(-_sp.ndtri(eps)),
        lower_endpoint=-math.inf,
        upper_endpoint=math.inf,
    )


def _atom_truncated_uniform() -> DistributionSpec:
    # F(x) = x/4 on [0,1), F(1) = 1: mass 3/4 sits at the upper endpoint.
    def cdf(x):
        if x < 0.0:
            return 0.0
        if x < 1.0:
            return 0.25 * x
        return 1.0

    def cdf_left(x):
        if x <= 0.0:
            return 0.0
        if x <= 1.0:
            return 0.25 * x
        return 1.0

    def quantile(u):
        return 4.0 * u if u < 0.25 else 1.0

    return DistributionSpec(
        name="atom_truncated_uniform",
        cdf=cdf,
        cdf_left_limit=cdf_left,
        quantile=quantile,
        log_sf=lambda x: math.log1p(-cdf(x)) if x < 1.0 else -math.inf,
        atom_at_upper_endpoint=0.75,
        lower_endpoint=0.0,
        upper_endpoint=1.0,
    )


def _ce_poly(x):
    return (_CE_A * x + _CE_B) * x + _CE_C


def _ce_min_log_pdf(x):
    # both branches stay finite for every representable x > 0, unlike the
    # density itself, which overflows below x ~ 1e-312
    if x <= 0.0:
        return -math.inf
    if x <= _S_KNOT:
        lx = math.log(x)
        return -lx - 2.0 * math.log1p(-lx)
    return math.log((_CE_A * x + (_CE_B - 2.0 * _CE_A)) * x
                    + (_CE_C - _CE_B)) - x


def _ce_solve_sf(eps):
    """Upper-branch x with (a x^2 + b x + c) e^-x = eps, taken from eps
    directly so no precision dies in a 1-u round trip."""
    if not (eps > 0.0):
        raise ValueError(f"survival target must be positive, got {eps}")
    if eps < 1e-12:
        return _ce_min_tail_quantile(eps)
    leps = math.log(eps)
    hi = 1.0
    while math.log(_ce_poly(hi)) - hi > leps:
        hi *= 2.0
    return _opt.brentq(lambda x: math.log(_ce_poly(x)) - x - leps,
                       _S_KNOT, hi, xtol=1e-14, rtol=8.9e-16)


def _ce_min_upper_quantile(u):
    """Upper-branch inverse of 1 - (a x^2 + b x + c) e^-x."""
    return _ce_solve_sf(1.0 - u)


def _ce_min_tail_quantile(eps):
    # Newton on log(poly(x)) - x = log(eps); quadratic tail makes the
    # correction term ~ 2 log x
    if eps >= 2.0 / 3.0:
        # below the knot the survival is 1 - 1/(1 - log x), solvable exactly
        return math.exp(1.0 - 1.0 / (1.0 - eps))
    if eps >= 1e-12:
        return _ce_solve_sf(eps)
    x = -math.log(eps) + 2.0 * math.log(max(2.0, -math.log(eps)))
    target = math.log(eps)
    for _ in range(60):
        p = _ce_poly(x)
        g = math.log(p) - x - target
        gp = (2.0 * _CE_A * x + _CE_B) / p - 1.0
        step = g / gp
        x -= step
        if abs(step) < 1e-13 * max(1.0, abs(x)):
            break
    return x


def _fisher_counterexample_min() -> DistributionSpec:
    s = _S_KNOT

    def cdf(x):
        if x <= 0.0:
            return 0.0
        if x <= s:
            return 1.0 / (1.0 - math.log(x))
        return -math.expm1(math.log(_ce_poly(x)) - x)

    def density(x):
        if x <= 0.0:
            return 0.0
        if x <= s:
            lg = 1.0 - math.log(x)
            return 1.0 / (x * lg * lg)
        return ((_CE_A * x + (_CE_B - 2.0 * _CE_A)) * x + (_CE_C - _CE_B)) \
            * math.exp(-x)

    def ddensity(x):
        if x <= 0.0:
            return 0.0
        if x <= s:
            lx = math.log(x)
            t = 1.0 / (x * (1.0 - lx))
            # overflow to -inf (never raise) when x^2 leaves double range
            return (1.0 + lx) * t * t / (1.0 - lx)
        return -((_CE_A * x + (_CE_B - 4.0 * _CE_A)) * x
                 + (2.0 * _CE_A - 2.0 * _CE_B + _CE_C)) * math.exp(-x)

    def quantile(u):
        if u <= 1.0 / 3.0:
            return math.exp(1.0 - 1.0 / u)
        return _ce_min_upper_quantile(u)

    def log_sf(x):
        if x <= 0.0:
            return 0.0
        if x <= s:
            lx = math.log(x)
            return math.log(-lx) - math.log1p(-lx)
        return math.log(_ce_poly(x)) - x

    return DistributionSpec(
        name="fisher_counterexample_min",
        cdf=cdf,
        density=density,
        density_derivative=ddensity,
        quantile=quantile,
        log_sf=log_sf,
        log_pdf=_ce_min_log_pdf,
        tail_quantile=_ce_min_tail_quantile,
        lower_endpoint=0.0,
        upper_endpoint=math.inf,
        breakpoints=(s,),
    )


def _fisher_counterexample_max() -> DistributionSpec:
    """Reflection of the minima family onto (-inf, 0); upper endpoint 0,
    continuous there (no atom): -log(-x)/(1-log(-x)) -> 1 as x -> 0-."""
    s = _S_KNOT
    mn = _fisher_counterexample_min()

    def cdf(x):
        if x >= 0.0:
            return 1.0
        if x >= -s:
            lt = math.log(-x)
            return -lt / (1.0 - lt)
        return _ce_poly(-x) * math.exp(x)

    def quantile(u):
        if u >= 2.0 / 3.0:
            # middle branch solves exactly: u = y/(1+y), y = -log(-x)
            return -math.exp(-u / (1.0 - u))
        # sf of the base minima family at -x equals u here, so solve on u
        return -_ce_solve_sf(u)

    def log_sf(x):
        if x >= 0.0:
            return -math.inf
        if x >= -s:
            return -math.log1p(-math.log(-x))
        return math.log1p(-_ce_poly(-x) * math.exp(x))

    return DistributionSpec(
        name="fisher_counterexample_max",
        cdf=cdf,
        density=lambda x: mn.density(-x),
        density_derivative=lambda x: -mn.density_derivative(-x),
        quantile=quantile,
        log_pdf=lambda x: _ce_min_log_pdf(-x),
        log_cdf=lambda x: mn.log_sf(-x),
        log_sf=log_sf,
        tail_quantile=lambda eps: -math.exp(1.0 - 1.0 / eps)
            if eps <= 1.0 / 3.0 else quantile(1.0 - eps),
        lower_endpoint=-math.inf,
        upper_endpoint=0.0,
        breakpoints=(-s,),
    )


_BUILDERS = {
    "power": lambda **kw: _power(float(kw.pop("lambda", kw.pop("lam", 1.0))), "power"),
    "uniform": lambda **kw: _power(1.0, "uniform"),
    "logistic": lambda **kw: _logistic(),
    "pareto": lambda **kw: _pareto(float(kw.pop("a"))),
    "negexp": lambda **kw: _negexp(),
    "weibull": lambda **kw: _weibull(float(kw.pop("c"))),
    "gumbel": lambda **kw: _gumbel(),
    "normal": lambda **kw: _normal(),
    "atom_truncated_uniform": lambda **kw: _atom_truncated_uniform(),
    "fisher_counterexample_min": lambda **kw: _fisher_counterexample_min(),
    "fisher_counterexample_max": lambda **kw: _fisher_counterexample_max(),
}

FAMILY_NAMES = tuple(sorted(_BUILDERS))

_REQUIRED_PARAMS = {"pareto": ("a",), "weibull": ("c",)}
_OPTIONAL_PARAMS = {"power": ("lambda", "lam")}


def make_family(name: str, **shape_params) -> DistributionSpec:
    """Build a registered family by name and shape parameters."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}") from None
    for p in _REQUIRED_PARAMS.get(name, ()):
        if p not in shape_params:
            raise ValueError(f"family {name!r} requires shape parameter {p!r}")
    allowed = set(_REQUIRED_PARAMS.get(name, ())) | set(_OPTIONAL_PARAMS.get(name, ()))
    extra = set(shape_params) - allowed
    if extra:
        raise ValueError(f"family {name!r} got unknown parameters {sorted(extra)}")
    return builder(**shape_params)


def parse_family(text: str) -> DistributionSpec:
    """Parse the CLI grammar ``name[:key=value,key=value]``."""
    name, _, tail = text.partition(":")
    params = {}
    if tail:
        for kv in tail.split(","):
            key, eq, val = kv.partition("=")
            if not eq:
                raise ValueError(f"bad family parameter {kv!r} in {text!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise ValueError(f"non-numeric value in {kv!r}") from None
    return make_family(name.strip(), **params)


def reflect(spec: DistributionSpec) -> DistributionSpec:
    """Distribution of -X: F_r(x) = 1 - F((-x)-).

    Partial minima under F become partial maxima under the reflection.  Uses
    the left limit of the cdf so jumps land on the correct side; an atom at
    the upper endpoint of F turns into a lower-endpoint atom of the
    reflection (the ``atom_at_upper_endpoint`` marker does not carry over).
    """
    f_left = spec.cdf_left_limit or spec.cdf

    def cdf(x):
        return 1.0 - f_left(-x)

    def quantile(u):
        # tail_quantile is Q(1 - .) without the 1-u cancellation, valid on
        # all of (0,1), so prefer it when the base provides one
        if spec.tail_quantile is not None:
            return -spec.tail_quantile(u)
        return -spec.quantile(1.0 - u)

    density = None
    ddensity = None
    if spec.density is not None:
        density = lambda x, _f=spec.density: _f(-x)
    if spec.density_derivative is not None:
        ddensity = lambda x, _g=spec.density_derivative: -_g(-x)
    log_sf = None
    if spec.log_cdf is not None:
        log_sf = lambda x, _g=spec.log_cdf: _g(-x)
    log_cdf = None
    if spec.log_sf is not None and spec.cdf_left_limit is None:
        log_cdf = lambda x, _g=spec.log_sf: _g(-x)
    log_pdf = None
    if spec.log_pdf is not None:
        log_pdf = lambda x, _g=spec.log_pdf: _g(-x)
    tail_q = lambda eps, _q=spec.quantile: -_q(eps)
    return DistributionSpec(
        name=spec.name + "_reflected" if not spec.name.endswith("_reflected")
            else spec.name[:-len("_reflected")],
        shape_params=dict(spec.shape_params),
        cdf=cdf,
        density=density,
        density_derivative=ddensity,
        quantile=quantile,
        log_sf=log_sf,
        log_cdf=log_cdf,
        log_pdf=log_pdf,
        tail_quantile=tail_q,
        lower_endpoint=-spec.upper_endpoint,
        upper_endpoint=-spec.lower_endpoint,
        breakpoints=tuple(sorted(-b for b in spec.breakpoints)),
    )


def log_concavity_probe(spec: DistributionSpec, grid_size: int = 64) -> str:
    """Numerically classify concavity structure on an interior grid.

    Returns the strongest verdict among ``density_log_concave``,
    ``density_nonincreasing``, ``dist_log_concave``, ``none_detected``.
    Advisory only: a grid pass is evidence, not proof.
    """
    if grid_size < 8:
        raise ValueError(f"grid_size must be >= 8, got {grid_size}")
    lo = spec.quantile(0.02)
    hi = spec.quantile(0.98)
    if spec.has_atom:
        # probe only the continuous part below the endpoint atom
        span = spec.upper_endpoint - spec.lower_endpoint
        hi = min(hi, spec.upper_endpoint - 1e-6 * span)
    xs = np.linspace(lo, hi, grid_size)
    h = xs[1] - xs[0]
    tol = 1e-9 * max(1.0, 1.0 / h**2)

    if spec.density is not None:
        fs = np.array([spec.density(x) for x in xs])
        if np.all(fs > 0.0):
            d2 = np.diff(np.log(fs), 2) / h**2
            if np.all(d2 <= tol):
                return "density_log_concave"
        if np.all(np.diff(fs) <= 1e-12 * np.abs(fs[:-1]) + tol):
            return "density_nonincreasing"

    Fs = np.array([spec.cdf(x) for x in xs])
    if np.all((Fs > 0.0) & (Fs <= 1.0)):
        d2 = np.diff(np.log(Fs), 2) / h**2
        if np.all(d2 <= tol):
            return "dist_log_concave"
    return "none_detected"
