"""Numeric verdicts for the estimator theory's checkable conditions.

Four families of diagnostics:

* spacing-correlation check: partial-maxima spacings pairwise non-positively
  correlated (the property that makes the scale BLUE non-negative and the
  diagonal variance bound valid);
* generalized hazard profile L(x) = f / ((1-F)^gamma (-log(1-F))^delta),
  probed on a geometric ladder toward the upper support endpoint;
* variance-rate studies Var[L2] * log n;
* Fisher information of partial maxima/minima data, including the limiting
  single-integral form for minima and its Cramer-Rao consequence.

Every report serializes to JSON (dict of plain types) and CSV (one row per
term, scalar fields repeated on each row so a file is self-contained).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quad import DEFAULT_TOL, QuadratureError, integrate
from .distributions import DistributionSpec
from .moments import (SpacingMoments, spacing_mean, spacing_moments,
                      spacing_second_moment, uniform_rate_scalars)
from .solvers import solve_blue_spacings

__all__ = [
    "NcpReport",
    "VonMisesProfile",
    "RateStudy",
    "FisherReport",
    "ncp_check",
    "von_mises_profile",
    "rate_study",
    "consistency_criterion",
    "fisher_information",
    "fisher_min_limit",
    "endpoint_atom_check",
]

_ADMISSIBLE_SUPPORTS = ((-math.inf, math.inf), (-math.inf, 0.0),
                        (0.0, math.inf))


def _fmt(v) -> str:
    return f"{v:.17g}"


# -------------------------------------------------------------------------
# report types
# -------------------------------------------------------------------------

@dataclass(frozen=True)
class NcpReport:
    """Spacing covariance sign check for one family and sample size."""

    family: str
    n: int
    cov_matrix: np.ndarray
    max_offdiag: float
    verdict: str
    tolerance: float

    def __post_init__(self):
        self.cov_matrix.setflags(write=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "ncp_pass"

    def to_json_dict(self) -> dict:
        return {"family": self.family, "n": self.n,
                "cov_matrix": [[float(v) for v in row]
                               for row in self.cov_matrix],
                "max_offdiag": self.max_offdiag, "verdict": self.verdict,
                "tolerance": self.tolerance}

    @classmethod
    def from_json_dict(cls, d: dict) -> "NcpReport":
        return cls(family=d["family"], n=int(d["n"]),
                   cov_matrix=np.asarray(d["cov_matrix"], dtype=float),
                   max_offdiag=float(d["max_offdiag"]), verdict=d["verdict"],
                   tolerance=float(d["tolerance"]))

    def to_csv(self, fh) -> None:
        fh.write("family,n,tolerance,max_offdiag,verdict,i,j,cov\n")
        k = self.cov_matrix.shape[0]
        head = (f"{self.family},{self.n},{_fmt(self.tolerance)},"
                f"{_fmt(self.max_offdiag)},{self.verdict}")
        for i in range(k):
            for j in range(i, k):
                fh.write(f"{head},{i + 1},{j + 1},"
                         f"{_fmt(self.cov_matrix[i, j])}\n")

    @classmethod
    def from_csv(cls, fh) -> "NcpReport":
        header = fh.readline().strip()
        if header != "family,n,tolerance,max_offdiag,verdict,i,j,cov":
            raise ValueError(f"unexpected header {header!r}")
        fam = n = tol = mx = verdict = None
        entries = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fam, sn, stol, smx, verdict, si, sj, sc = line.split(",")
            n, tol, mx = int(sn), float(stol), float(smx)
            entries[(int(si), int(sj))] = float(sc)
        k = max(j for _, j in entries)
        cov = np.empty((k, k))
        for (i, j), v in entries.items():
            cov[i - 1, j - 1] = cov[j - 1, i - 1] = v
        return cls(family=fam, n=n, cov_matrix=cov, max_offdiag=mx,
                   verdict=verdict, tolerance=tol)


@dataclass(frozen=True)
class VonMisesProfile:
    """Generalized hazard rate probed along a ladder toward omega(F)."""

    gamma: float
    delta: float
    probe_points: tuple
    liminf_est: float
    limsup_est: float
    condition_met: str
    family: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {"gamma": self.gamma, "delta": self.delta,
                "probe_points": [[x, l] for x, l in self.probe_points],
                "liminf_est": self.liminf_est, "limsup_est": self.limsup_est,
                "condition_met": self.condition_met, "family": self.family}

    @classmethod
    def from_json_dict(cls, d: dict) -> "VonMisesProfile":
        return cls(gamma=float(d["gamma"]), delta=float(d["delta"]),
                   probe_points=tuple((float(x), float(l))
                                      for x, l in d["probe_points"]),
                   liminf_est=float(d["liminf_est"]),
                   limsup_est=float(d["limsup_est"]),
                   condition_met=d["condition_met"], family=d.get("family"))

    def to_csv(self, fh) -> None:
        fh.write("family,gamma,delta,condition_met,liminf_est,limsup_est,"
                 "x,l_value\n")
        head = (f"{self.family or ''},{_fmt(self.gamma)},{_fmt(self.delta)},"
                f"{self.condition_met},{_fmt(self.liminf_est)},"
                f"{_fmt(self.limsup_est)}")
        for x, l in self.probe_points:
            fh.write(f"{head},{_fmt(x)},{_fmt(l)}\n")

    @classmethod
    def from_csv(cls, fh) -> "VonMisesProfile":
        header = fh.readline().strip()
        if header != ("family,gamma,delta,condition_met,liminf_est,"
                      "limsup_est,x,l_value"):
            raise ValueError(f"unexpected header {header!r}")
        fam = gamma = delta = cond = lif = lsf = None
        pts = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fam, sg, sd, cond, sli, sls, sx, sl = line.split(",")
            gamma, delta, lif, lsf = (float(sg), float(sd), float(sli),
                                      float(sls))
            pts.append((float(sx), float(sl)))
        return cls(gamma=gamma, delta=delta, probe_points=tuple(pts),
                   liminf_est=lif, limsup_est=lsf, condition_met=cond,
                   family=fam or None)


@dataclass(frozen=True)
class RateStudy:
    """Var[L2] (theta2^2 units) along a ladder of sample sizes."""

    family: str
    rows: tuple  # (n, var_L2_theta2sq, var_L2_times_log_n)
    method: str

    def to_json_dict(self) -> dict:
        return {"family": self.family, "method": self.method,
                "rows": [[n, v, vl] for n, v, vl in self.rows]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "RateStudy":
        return cls(family=d["family"], method=d["method"],
                   rows=tuple((int(n), float(v), float(vl))
                              for n, v, vl in d["rows"]))

    def to_csv(self, fh) -> None:
        fh.write("family,method,n,var_l2_theta2sq,var_l2_times_log_n\n")
        for n, v, vl in self.rows:
            fh.write(f"{self.family},{self.method},{n},{_fmt(v)},{_fmt(vl)}\n")

    @classmethod
    def from_csv(cls, fh) -> "RateStudy":
        header = fh.readline().strip()
        if header != "family,method,n,var_l2_theta2sq,var_l2_times_log_n":
            raise ValueError(f"unexpected header {header!r}")
        fam = method = None
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fam, method, sn, sv, svl = line.split(",")
            rows.append((int(sn), float(sv), float(svl)))
        return cls(family=fam, rows=tuple(rows), method=method)


@dataclass(frozen=True)
class FisherReport:
    """Cumulative Fisher information of the first n partial maxima/minima."""

    family: str
    direction: str
    n_values: tuple
    information: tuple  # units 1/theta2^2
    i_min_limit: Optional[float] = None
    cramer_rao_floor: Optional[float] = None

    def to_json_dict(self) -> dict:
        key = "i_max_n" if self.direction == "maxima" else "i_min_n"
        out = {"family": self.family, "direction": self.direction,
               "n_values": list(self.n_values),
               key: [float(v) for v in self.information]}
        if self.i_min_limit is not None:
            out["i_min_limit"] = self.i_min_limit
        if self.cramer_rao_floor is not None:
            out["cramer_rao_floor"] = self.cramer_rao_floor
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "FisherReport":
        direction = d["direction"]
        key = "i_max_n" if direction == "maxima" else "i_min_n"
        return cls(family=d["family"], direction=direction,
                   n_values=tuple(int(n) for n in d["n_values"]),
                   information=tuple(float(v) for v in d[key]),
                   i_min_limit=d.get("i_min_limit"),
                   cramer_rao_floor=d.get("cramer_rao_floor"))

    def to_csv(self, fh) -> None:
        fh.write("family,direction,i_min_limit,cramer_rao_floor,n,"
                 "information\n")
        lim = "" if self.i_min_limit is None else _fmt(self.i_min_limit)
        floor = ("" if self.cramer_rao_floor is None
                 else _fmt(self.cramer_rao_floor))
        for n, v in zip(self.n_values, self.information):
            fh.write(f"{self.family},{self.direction},{lim},{floor},"
                     f"{n},{_fmt(v)}\n")

    @classmethod
    def from_csv(cls, fh) -> "FisherReport":
        header = fh.readline().strip()
        if header != ("family,direction,i_min_limit,cramer_rao_floor,n,"
                      "information"):
            raise ValueError(f"unexpected header {header!r}")
        fam = direction = None
        lim = floor = None
        ns, vals = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fam, direction, slim, sfloor, sn, sv = line.split(",")
            lim = float(slim) if slim else None
            floor = float(sfloor) if sfloor else None
            ns.append(int(sn))
            vals.append(float(sv))
        return cls(family=fam, direction=direction, n_values=tuple(ns),
                   information=tuple(vals), i_min_limit=lim,
                   cramer_rao_floor=floor)


# -------------------------------------------------------------------------
# spacing correlation check
# -------------------------------------------------------------------------

def ncp_check(spec: DistributionSpec, n: int, tolerance: float = 1e-8,
              tol: float = DEFAULT_TOL) -> NcpReport:
    """Verdict on pairwise non-positive spacing correlation at sample size n.

    Passes when the largest off-diagonal Cov[Z_i, Z_j] does not exceed
    `tolerance`.  Needs n >= 3; with two observations there is a single
    spacing and nothing to check.
    """
    if n < 3:
        raise ValueError(f"spacing correlation check needs n >= 3, got {n}")
    sm = spacing_moments(spec, n, tol=tol)
    cov = np.array(sm.s_mat)
    off = cov[~np.eye(n - 1, dtype=bool)]
    max_off = float(off.max())
    verdict = "ncp_pass" if max_off <= tolerance else "ncp_fail"
    return NcpReport(family=spec.name, n=n, cov_matrix=cov,
                     max_offdiag=max_off, verdict=verdict,
                     tolerance=tolerance)


# -------------------------------------------------------------------------
# generalized hazard profile
# -------------------------------------------------------------------------

def von_mises_profile(spec: DistributionSpec, gamma: float, delta: float,
                      probes: int = 12) -> VonMisesProfile:
    """L(x) = f(x) / ((1-F)^gamma (-log(1-F))^delta) along u_k = 1 - 10^-k.

    Everything runs in the log domain, so the ladder can go far beyond the
    point where 1-F(x) underflows.  Probes where the density itself
    underflows (or that no longer increase in x after float saturation) are
    dropped with a warning.  liminf/limsup estimates take the min/max of the
    last five surviving probes.
    """
    if probes < 1:
        raise ValueError(f"need at least one probe, got {probes}")
    if spec.log_pdf is None or spec.log_sf is None:
        raise ValueError(f"{spec.name} lacks the log-density/log-survival "
                         "functions this profile needs")
    points = []
    log_ls = []
    prev_x = -math.inf
    dropped = 0
    for k in range(1, probes + 1):
        eps = 10.0 ** (-k)
        x = (spec.tail_quantile(eps) if spec.tail_quantile is not None
             else spec.quantile(1.0 - eps))
        if not x > prev_x:
            dropped += 1
            continue
        try:
            log_sf = spec.log_sf(x)
            if not log_sf < 0.0:
                dropped += 1
                continue
            log_l = (spec.log_pdf(x) - gamma * log_sf
                     - delta * math.log(-log_sf))
        except (ValueError, OverflowError):
            # quantile saturated onto the endpoint where the log forms
            # leave their domain
            dropped += 1
            continue
        if not math.isfinite(log_l):
            dropped += 1
            continue
        prev_x = x
        points.append((x, math.exp(log_l)))
        log_ls.append(log_l)
    if dropped:
        warnings.warn(f"{dropped} of {probes} hazard probes dropped "
                      "(underflow or saturated quantile)", RuntimeWarning,
                      stacklevel=2)
    if not points:
        raise ArithmeticError("no usable hazard probes survive")
    tail = log_ls[-5:]
    if delta == 0.0 and gamma < 1.5:
        condition = "case_i"
    elif delta > 0.0 and 0.5 < gamma <= 1.0:
        condition = "case_ii"
    else:
        condition = "not_met"
    return VonMisesProfile(gamma=gamma, delta=delta,
                           probe_points=tuple(points),
                           liminf_est=math.exp(min(tail)),
                           limsup_est=math.exp(max(tail)),
                           condition_met=condition, family=spec.name)


# -------------------------------------------------------------------------
# variance rate study
# -------------------------------------------------------------------------

def _is_uniform_family(spec: DistributionSpec) -> bool:
    if spec.name == "uniform":
        return True
    lam = spec.shape_params.get("lambda")
    return spec.name == "power" and lam is not None and lam == 1.0

DENSE_RATE_LIMIT = 2000


def rate_study(spec: DistributionSpec, n_values, *,
               ncp_override: bool = False,
               tol: float = DEFAULT_TOL) -> RateStudy:
    """Var[L2] and Var[L2]*log n along a ladder of sample sizes.

    The uniform family goes through the exact closed form (O(n) per point,
    so ladders up to 10^6 are fine); anything else solves the dense spacing
    system, capped at n = 2000.  The diagonal variance-bound theory behind
    the study needs non-positively correlated spacings, so a quick check at
    n = 6 gates the run unless `ncp_override` is set.
    """
    ns = sorted(set(int(n) for n in n_values))
    if not ns or ns[0] < 2:
        raise ValueError("sample-size ladder must contain values >= 2")
    uniform = _is_uniform_family(spec)
    if not uniform and max(ns) > DENSE_RATE_LIMIT:
        raise ValueError(f"dense path capped at n = {DENSE_RATE_LIMIT}; "
                         f"got {max(ns)}")
    if not ncp_override:
        probe = ncp_check(spec, 6, tolerance=1e-8, tol=tol)
        if not probe.passed:
            raise ValueError(
                f"{spec.name} fails the spacing-correlation check "
                f"(max off-diagonal {probe.max_offdiag:.3e}); pass "
                "ncp_override=True to study it anyway")
    rows = []
    if uniform:
        for n in ns:
            a, b, c = uniform_rate_scalars(n)
            var = a / (a * b - c * c)
            rows.append((n, var, var * math.log(n)))
        method = "closed_form_uniform"
    else:
        for n in ns:
            sol = solve_blue_spacings(spacing_moments(spec, n, tol=tol),
                                      family=spec.name)
            var = sol.theoretical_variance
            rows.append((n, var, var * math.log(n)))
        method = "dense_solve"
    return RateStudy(family=spec.name, rows=tuple(rows), method=method)


def consistency_criterion(spec: DistributionSpec, k_values,
                          tol: float = DEFAULT_TOL) -> list:
    """Rows (k, E[Z_k^2]/(k E[Z_k]^2), m_k^2/s_k^2) for the probed indices.

    Boundedness of the ratio over k is the workable sufficient condition for
    the O(1/log n) variance rate; the last column tabulates the series terms
    whose divergence drives that rate.  Per-k quadrature failures are
    recorded as NaN rows with a warning.
    """
    rows = []
    for k in sorted(set(int(k) for k in k_values)):
        if k < 1:
            raise ValueError(f"spacing index must be >= 1, got {k}")
        try:
            m = spacing_mean(spec, k, tol)
            ez2 = spacing_second_moment(spec, k, tol)
        except QuadratureError as exc:
            warnings.warn(f"k={k}: {exc}", RuntimeWarning, stacklevel=2)
            rows.append({"k": k, "ratio": math.nan, "series_term": math.nan})
            continue
        s2 = ez2 - m * m
        rows.append({"k": k, "ratio": ez2 / (k * m * m),
                     "series_term": m * m / s2})
    return rows


# -------------------------------------------------------------------------
# Fisher information
# -------------------------------------------------------------------------

def _check_fisher_support(spec: DistributionSpec):
    support = (spec.lower_endpoint, spec.upper_endpoint)
    if support not in _ADMISSIBLE_SUPPORTS:
        raise ValueError(
            f"support {support} not admissible; the information formulas "
            "need (-inf,inf), (-inf,0) or (0,inf)")
    if spec.density is None or spec.density_derivative is None:
        raise ValueError(f"{spec.name} lacks density/density-derivative")
    if spec.has_atom:
        raise ValueError("information formulas need an absolutely "
                         "continuous distribution")


def _fisher_term(spec: DistributionSpec, direction: str, k: int,
                 tol: float) -> float:
    """k-th summand of the information sum, integrated on the u scale."""
    f, fp = spec.density, spec.density_derivative
    if direction == "maxima":
        x_of = spec.quantile
        pts = tuple(spec.cdf(b) for b in spec.breakpoints)
    else:
        x_of = (spec.tail_quantile if spec.tail_quantile is not None
                else lambda w: spec.quantile(1.0 - w))
        pts = tuple(math.exp(spec.log_sf(b)) if spec.log_sf is not None
                    else 1.0 - spec.cdf(b) for b in spec.breakpoints)
    sign = 1.0 if direction == "maxima" else -1.0
    log_pdf = spec.log_pdf

    def core(u):
        x = x_of(u)
        fx = f(x)
        if fx <= 0.0 or not math.isfinite(fx):
            return 0.0
        t1 = x * (fp(x) / fx)
        if not math.isfinite(t1) and log_pdf is not None and x != 0.0:
            # extreme tail compression can overflow f' while x f'/f stays
            # bounded; fall back to a log-log difference quotient
            h = 1e-6
            t1 = (log_pdf(x * math.exp(h))
                  - log_pdf(x * math.exp(-h))) / (2.0 * h)
        if not math.isfinite(t1):
            return 0.0
        val = 1.0 + t1 + sign * (k - 1.0) * (x * fx) / u
        return val * val

    if k <= _FISHER_SUBST_K:
        def g(u):
            if u <= 0.0 or u >= 1.0:
                return 0.0
            return math.exp((k - 1.0) * math.log(u)) * core(u)
        return integrate(g, 0.0, 1.0, tol=tol, points=pts)

    r = 1.0 / k

    def g(y):
        if y <= 0.0 or y >= 1.0:
            return 0.0
        return core(math.exp(r * math.log(y)))

    # the substitution u = y^(1/k) maps breakpoints to u^k, usually ~0
    sub_pts = tuple(math.exp(k * math.log(p)) for p in pts if 0.0 < p < 1.0)
    return r * integrate(g, 0.0, 1.0, tol=tol / r * 0.1, points=sub_pts)


_FISHER_SUBST_K = 50


def fisher_information(spec: DistributionSpec, direction: str, n: int,
                       tol: float = DEFAULT_TOL) -> FisherReport:
    """Cumulative information in (X*_1, ..., X*_k) for k = 1..n.

    Maxima: I_n = sum_k int f F^{k-1} (1 + x f'/f + (k-1) x f/F)^2 dx, with
    the mirrored (1-F) form for minima, both mapped to the probability scale.
    Values are in units of 1/theta2^2.
    """
    if direction not in ("maxima", "minima"):
        raise ValueError(f"direction must be maxima or minima, got "
                         f"{direction!r}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    _check_fisher_support(spec)
    terms = [_fisher_term(spec, direction, k, tol) for k in range(1, n + 1)]
    info = tuple(np.cumsum(terms))
    return FisherReport(family=spec.name, direction=direction,
                        n_values=tuple(range(1, n + 1)),
                        information=info)


def _s_integrand_factory(spec: DistributionSpec):
    """S(x) of the limiting minima information, grouped as
    mu [ (1 + t1 - t2)^2 + t2 t3 + t2^2 ] with t1 = x f'/f, t2 = x mu,
    t3 = x lambda (failure rate); mu = f/F is the reverse failure rate."""
    f, fp, F = spec.density, spec.density_derivative, spec.cdf
    log_pdf, log_sf = spec.log_pdf, spec.log_sf

    def s_of_x(x):
        fx = f(x)
        if fx <= 0.0 or not math.isfinite(fx):
            return 0.0
        cdf_x = F(x)
        if cdf_x <= 0.0:
            return 0.0
        mu = fx / cdf_x
        if log_pdf is not None and log_sf is not None:
            lam = math.exp(log_pdf(x) - log_sf(x))
        else:
            sf = 1.0 - cdf_x
            if sf <= 0.0:
                return 0.0
            lam = fx / sf
        t1 = x * fp(x) / fx
        t2 = x * mu
        t3 = x * lam
        w = 1.0 + t1 - t2
        return mu * (w * w + t2 * (t3 + t2))

    return s_of_x


def _lower_piece(spec, s_split, tol):
    """int_0^s S dx on the u scale, with underflow floor completion and
    divergence detection at the lower endpoint."""
    s_of_x = _s_integrand_factory(spec)
    q, f = spec.quantile, spec.density

    def g(u):
        if u <= 0.0:
            return 0.0
        x = q(u)
        fx = f(x)
        if fx <= 0.0 or not math.isfinite(fx) or x <= 0.0:
            return 0.0
        return s_of_x(x) / fx

    u_top = spec.cdf(s_split)
    # floor: smallest u where the quantile map still lands strictly inside
    u_floor = u_top
    for j in range(1, 60):
        cand = u_top * 10.0 ** (-j)
        x = q(cand)
        if not (x > 0.0 and math.isfinite(x) and f(x) > 0.0
                and math.isfinite(s_of_x(x))):
            break
        u_floor = cand
    # divergence probe: decade contributions should shrink toward 0
    decades = []
    hi = u_top
    while hi / 10.0 >= u_floor and len(decades) < 12:
        lo = hi / 10.0
        decades.append(integrate(g, lo, hi, tol=tol))
        hi = lo
    if len(decades) >= 4 and all(
            decades[i + 1] >= decades[i] * 0.999 for i in range(len(decades) - 4, len(decades) - 1)):
        return math.inf
    main = integrate(g, u_floor, u_top, tol=tol)
    # complete (0, u_floor) by a short power fit g ~ c1 u + c2 u^2
    probes = np.array([u_floor, 2.0 * u_floor, 3.0 * u_floor,
                       4.0 * u_floor])
    vals = np.array([g(u) for u in probes])
    design = np.column_stack([probes, probes ** 2])
    c1, c2 = np.linalg.lstsq(design, vals, rcond=None)[0]
    return main + c1 * u_floor ** 2 / 2.0 + c2 * u_floor ** 3 / 3.0


def _upper_piece(spec, s_split, tol):
    """int_s^inf S dx with doubling horizons and divergence detection."""
    s_of_x = _s_integrand_factory(spec)
    total = integrate(s_of_x, s_split, 2.0, tol=tol,
                      points=[b for b in spec.breakpoints if s_split < b < 2.0])
    increments = []
    t_lo = 2.0
    while t_lo < 2.0 ** 20:
        t_hi = 2.0 * t_lo
        inc = integrate(s_of_x, t_lo, t_hi, tol=tol)
        increments.append(inc)
        total += inc
        if (len(increments) >= 3 and increments[-1] > increments[-2] > increments[-3]
                and increments[-1] > tol):
            return math.inf
        t_lo = t_hi
    return total


def fisher_min_limit(spec: DistributionSpec, tol: float = DEFAULT_TOL) -> dict:
    """Limiting information of partial minima (single-integral form).

    Splits the integral at the family's seam when one exists (else at 1),
    returns both pieces, their sum i_min (units 1/theta2^2), and the
    Cramer-Rao floor 1/i_min on the variance of unbiased location
    estimators in theta2^2 units.  A finite value means no consistent
    unbiased estimator exists; divergence is detected and reported as +inf
    with no floor.
    """
    _check_fisher_support(spec)
    if spec.lower_endpoint != 0.0 or not math.isinf(spec.upper_endpoint):
        raise ValueError("the limiting minima integral needs support (0, inf)")
    s_split = spec.breakpoints[0] if spec.breakpoints else 1.0
    below = _lower_piece(spec, s_split, tol)
    above = _upper_piece(spec, s_split, tol)
    i_min = below + above
    if math.isfinite(i_min):
        floor = 1.0 / i_min
        verdict = ("finite limiting information: no consistent unbiased "
                   "estimator exists")
    else:
        floor = None
        verdict = ("limiting information diverges: no Cramer-Rao "
                   "obstruction to consistency")
    return {"integral_below_s": below, "integral_above_s": above,
            "i_min": i_min, "cramer_rao_floor": floor, "verdict": verdict}


def endpoint_atom_check(spec: DistributionSpec, atol: float = 1e-12) -> dict:
    """Mass at the upper support endpoint and the resulting triviality flag.

    A positive atom at omega(F) gives every partial maximum positive
    probability of sitting exactly at omega, which pins the scale estimator
    at 0 with that probability for every n, so consistency is impossible.
    """
    hi = spec.upper_endpoint
    if math.isinf(hi):
        mass = 0.0
    else:
        left = (spec.cdf_left_limit(hi) if spec.cdf_left_limit is not None
                else spec.cdf(np.nextafter(hi, -math.inf)))
        mass = 1.0 - left
        if mass < atol:
            mass = 0.0
    return {"atom_mass": mass, "triviality_flag": mass > 0.0}
