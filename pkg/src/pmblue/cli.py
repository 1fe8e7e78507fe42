"""Command line front end.

One subcommand per operation family:

* ``moments``    expectation/covariance table of the first n partial maxima
* ``blue``       all linear coefficient solutions at one sample size
* ``ncp``        spacing-correlation verdict
* ``vonmises``   generalized hazard profile along the upper-tail ladder
* ``rate``       Var[L2] * log n study over a sample-size ladder
* ``fisher``     information of the first n record values (+ minima limit)
* ``simulate``   Monte Carlo validation run
* ``paper-pack`` the bundled reference artifacts with pass/fail gates

Validation problems exit 2 and print one line to stderr of the form
``pmblue: error: parameter=<name>: <detail>``; numerical failures exit 3;
a failed paper-pack gate exits 4.  CSV artifacts carry a header row, comma
separators, LF line endings and 17-significant-digit floats; JSON artifacts
are a single document per file.  Re-running a command reproduces its output
byte for byte.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

import numpy as np

from ._quad import DEFAULT_TOL, QuadratureError
from . import diagnostics as dg
from .distributions import make_family, parse_family, reflect
from .moments import (moments_to_csv, pm_moments_table, spacing_moments,
                      uniform_rate_scalars)
from .simulate import SimulationConfig, run_simulation
from .solvers import (simple_scale_estimator, solve_blie,
                      solve_blie_spacings, solve_blue, solve_blue_spacings,
                      to_partial_maxima_basis)

_FMT = "%.17g"


class CliError(Exception):
    """Validation failure attributable to one named parameter."""

    def __init__(self, parameter: str, detail: str):
        super().__init__(detail)
        self.parameter = parameter


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _fmt(v) -> str:
    return _FMT % v


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_doc(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _require(args, names, sub):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise CliError(name, f"{sub} requires --{name}")


def _family(args):
    if args.dist is None:
        raise CliError("dist", "missing --dist")
    try:
        return parse_family(args.dist)
    except (ValueError, TypeError) as exc:
        raise CliError("dist", str(exc)) from exc


def _positive_int(args, name, minimum=1):
    v = getattr(args, name)
    if v is None or v < minimum:
        raise CliError(name, f"--{name} must be an integer >= {minimum}, "
                       f"got {v}")
    return v


# -------------------------------------------------------------------------
# subcommand bodies
# -------------------------------------------------------------------------

def _cmd_moments(args):
    spec = _family(args)
    n = _positive_int(args, "n", 2)
    pm = pm_moments_table(spec, n, tol=args.tol)
    if args.format == "csv":
        buf = io.StringIO()
        moments_to_csv(pm, buf)
        _emit(buf.getvalue(), args.out)
    else:
        doc = {"family": spec.name, "n": n,
               "mu": [float(v) for v in pm.mu],
               "sigma": [[float(v) for v in row] for row in pm.sigma]}
        _emit(_json_doc(doc), args.out)
    return 0


_SOLUTION_CSV_HEADER = ("label,kind,basis,n,family,index,coefficient,"
                        "theoretical_variance,theoretical_mse,delta,"
                        "blie_ratio_a,variance_bound,condition_estimate")


def solutions_to_csv(solutions: dict) -> str:
    """Flat lossless table: one row per coefficient, risk fields repeated."""
    lines = [_SOLUTION_CSV_HEADER]
    for label, sol in solutions.items():
        meta = [label, sol.kind, sol.basis, str(sol.n), sol.family or ""]
        risks = [sol.theoretical_variance, sol.theoretical_mse, sol.delta,
                 sol.blie_ratio_a, sol.variance_bound,
                 sol.condition_estimate]
        risk_cells = ["" if v is None else _fmt(v) for v in risks]
        for i, c in enumerate(sol.coefficients):
            lines.append(",".join(meta + [str(i + 1), _fmt(c)] + risk_cells))
    return "\n".join(lines) + "\n"


def solutions_from_csv(fh) -> dict:
    from .solvers import EstimatorSolution
    header = fh.readline().strip()
    if header != _SOLUTION_CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    acc = {}
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        (label, kind, basis, n, family, idx, coef, tv, tm, delta, ba, vb,
         ce) = line.split(",")
        d = acc.setdefault(label, {"kind": kind, "basis": basis,
                                   "n": int(n),
                                   "family": family or None,
                                   "coefficients": {}})
        d["coefficients"][int(idx)] = float(coef)
        for key, cell in (("theoretical_variance", tv),
                          ("theoretical_mse", tm), ("delta", delta),
                          ("blie_ratio_a", ba), ("variance_bound", vb),
                          ("condition_estimate", ce)):
            if cell:
                d[key] = float(cell)
    out = {}
    for label, d in acc.items():
        coefs = d.pop("coefficients")
        d["coefficients"] = [coefs[i] for i in sorted(coefs)]
        out[label] = EstimatorSolution.from_dict(d)
    return out


def _cmd_blue(args):
    spec = _family(args)
    n = _positive_int(args, "n", 2)
    pm = pm_moments_table(spec, n, tol=args.tol)
    sm = spacing_moments(spec, n, tol=args.tol)
    l1, l2 = solve_blue(pm, family=spec.name)
    t1, t2 = solve_blie(pm, family=spec.name)
    l2_sp = solve_blue_spacings(sm, family=spec.name)
    t2_sp = solve_blie_spacings(sm, family=spec.name)
    u2 = simple_scale_estimator(sm, family=spec.name)
    solutions = {"blue_location": l1, "blue_scale": l2,
                 "blie_location": t1, "blie_scale": t2,
                 "blue_scale_spacings": l2_sp,
                 "blie_scale_spacings": t2_sp, "simple_scale": u2}
    translated = to_partial_maxima_basis(l2_sp)
    cross = {
        "l2_max_coefficient_diff": float(np.max(np.abs(
            translated.coefficients - l2.coefficients))),
        "l2_variance_diff": abs(l2.theoretical_variance
                                - l2_sp.theoretical_variance),
    }
    if args.format == "csv":
        _emit(solutions_to_csv(solutions), args.out)
    else:
        doc = {"family": spec.name, "n": n,
               "solutions": {k: s.to_dict() for k, s in solutions.items()},
               "cross_check": cross}
        _emit(_json_doc(doc), args.out)
    return 0


def _cmd_ncp(args):
    spec = _family(args)
    n = _positive_int(args, "n", 3)
    rep = dg.ncp_check(spec, n, tol=args.tol)
    if args.format == "csv":
        buf = io.StringIO()
        rep.to_csv(buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json_doc(rep.to_json_dict()), args.out)
    return 0


def _cmd_vonmises(args):
    spec = _family(args)
    _require(args, ["gamma", "delta"], "vonmises")
    prof = dg.von_mises_profile(spec, args.gamma, args.delta)
    if args.format == "csv":
        buf = io.StringIO()
        prof.to_csv(buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json_doc(prof.to_json_dict()), args.out)
    return 0


def _cmd_rate(args):
    spec = _family(args)
    if args.n_ladder is None:
        raise CliError("n-ladder", "rate requires --n-ladder n1,n2,...")
    study = dg.rate_study(spec, args.n_ladder, tol=args.tol)
    if args.format == "csv":
        buf = io.StringIO()
        study.to_csv(buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json_doc(study.to_json_dict()), args.out)
    return 0


def _cmd_fisher(args):
    spec = _family(args)
    n = _positive_int(args, "n", 1)
    rep = dg.fisher_information(spec, args.direction, n, tol=args.tol)
    if (args.direction == "minima" and spec.lower_endpoint == 0.0
            and math.isinf(spec.upper_endpoint)):
        lim = dg.fisher_min_limit(spec, tol=args.tol)
        rep = dg.FisherReport(
            family=rep.family, direction=rep.direction,
            n_values=rep.n_values, information=rep.information,
            i_min_limit=lim["i_min"],
            cramer_rao_floor=lim["cramer_rao_floor"])
    if args.format == "csv":
        buf = io.StringIO()
        rep.to_csv(buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json_doc(rep.to_json_dict()), args.out)
    return 0


def _cmd_simulate(args):
    spec = _family(args)  # early family validation
    _require(args, ["n", "replicates"], "simulate")
    try:
        cfg = SimulationConfig(
            family=spec.name, shape_params=dict(spec.shape_params),
            theta1=args.theta1, theta2=args.theta2, n=args.n,
            replicates=args.replicates, seed=args.seed,
            direction=args.direction)
    except ValueError as exc:
        msg = str(exc)
        for p in ("theta2", "replicates", "seed", "n"):
            if p in msg:
                raise CliError(p, msg) from exc
        raise CliError("simulate", msg) from exc
    if args.format == "csv":
        buf = io.StringIO()
        run_simulation(cfg, tol=args.tol, dump=buf)
        _emit(buf.getvalue(), args.out)
    else:
        rep = run_simulation(cfg, tol=args.tol)
        _emit(_json_doc(rep.to_json_dict()), args.out)
    return 0


# -------------------------------------------------------------------------
# paper-pack
# -------------------------------------------------------------------------

_SWEEP = (("power:lambda=1", {}), ("power:lambda=2", {}), ("logistic", {}),
          ("pareto:a=3", {}), ("negexp", {}), ("weibull:c=1", {}),
          ("weibull:c=2", {}), ("gumbel", {}), ("normal", {}))

_VM_TABLE = (
    # family, gamma, delta, expected limit, probes
    ("power:lambda=1", 0.0, 0.0, 1.0, 12),
    ("power:lambda=2", 0.0, 0.0, 2.0, 12),
    ("logistic", 1.0, 0.0, 1.0, 12),
    ("pareto:a=3", 4.0 / 3.0, 0.0, 3.0, 12),
    ("negexp", 0.0, 0.0, 1.0, 12),
    ("weibull:c=1", 1.0, 0.0, 1.0, 12),
    ("weibull:c=2", 1.0, 0.5, 2.0, 12),
    ("gumbel", 1.0, 0.0, 1.0, 12),
    ("normal", 1.0, 0.5, math.sqrt(2.0), 92),
)


def _gate(checks, name, ok, detail=""):
    checks.append((name, bool(ok), detail))
    tag = "pass" if ok else "FAIL"
    sys.stdout.write(f"[{tag}] {name}{(' ' + detail) if detail else ''}\n")


def _pack_rate(outdir, checks):
    ladder = (10, 100, 1000, 10_000, 100_000, 1_000_000)
    lines = ["n,var_l2_theta2sq,var_l2_times_log_n,"
             "var_l1_theta2sq,var_l1_times_log_n"]
    ratios_l2 = {}
    for n in ladder:
        a, b, c = uniform_rate_scalars(n)
        det = a * b - c * c
        v2, v1 = a / det, (a + b - 2.0 * c) / det
        ln = math.log(n)
        ratios_l2[n] = v2 * ln / 2.0
        lines.append(",".join([str(n), _fmt(v2), _fmt(v2 * ln), _fmt(v1),
                               _fmt(v1 * ln)]))
    with open(os.path.join(outdir, "rate_uniform.csv"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    _gate(checks, "rate: Var[L2]ln(n)/2 at n=1e4 in [0.72, 0.75]",
          0.72 <= ratios_l2[10_000] <= 0.75, f"got {ratios_l2[10_000]:.6f}")
    _gate(checks, "rate: Var[L2]ln(n)/2 at n=1e5 in [0.76, 0.79]",
          0.76 <= ratios_l2[100_000] <= 0.79, f"got {ratios_l2[100_000]:.6f}")
    seq = [ratios_l2[n] for n in ladder]
    _gate(checks, "rate: ratio increases toward 1 along the ladder",
          all(x < y for x, y in zip(seq, seq[1:])) and seq[-1] < 1.0)


def _pack_ncp(outdir, checks, tol):
    lines = ["family,n,max_offdiag,verdict,tolerance"]
    all_pass = True
    for text, _ in _SWEEP:
        spec = parse_family(text)
        rep = dg.ncp_check(spec, 6, tol=tol)
        all_pass &= rep.passed
        lines.append(f"{text},{rep.n},{_fmt(rep.max_offdiag)},"
                     f"{rep.verdict},{_fmt(rep.tolerance)}")
    atom = dg.ncp_check(make_family("atom_truncated_uniform"), 3, tol=tol)
    lines.append(f"atom_truncated_uniform,{atom.n},"
                 f"{_fmt(atom.max_offdiag)},{atom.verdict},"
                 f"{_fmt(atom.tolerance)}")
    with open(os.path.join(outdir, "ncp_verdicts.csv"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    _gate(checks, "ncp: all nine continuous families pass at n=6", all_pass)
    _gate(checks, "ncp: endpoint-atom family fails as predicted",
          not atom.passed, f"max offdiag {atom.max_offdiag:.4e}")


def _pack_vonmises(outdir, checks):
    lines = ["family,gamma,delta,liminf_est,limsup_est,expected,"
             "condition_met"]
    for text, gamma, delta, expected, probes in _VM_TABLE:
        spec = parse_family(text)
        prof = dg.von_mises_profile(spec, gamma, delta, probes=probes)
        lines.append(f"{text},{_fmt(gamma)},{_fmt(delta)},"
                     f"{_fmt(prof.liminf_est)},{_fmt(prof.limsup_est)},"
                     f"{_fmt(expected)},{prof.condition_met}")
        mid = 0.5 * (prof.liminf_est + prof.limsup_est)
        band = 0.01 if text == "normal" else 0.02
        _gate(checks, f"vonmises: {text} limit within {band:.0%} of "
              f"{expected:.4f}", abs(mid - expected) <= band * expected,
              f"got {mid:.6f}")
        if text.startswith("pareto"):
            _gate(checks, "vonmises: pareto profile flat "
                  "(limsup/liminf <= 1.05)",
                  prof.limsup_est / prof.liminf_est <= 1.05)
    with open(os.path.join(outdir, "vonmises_limits.csv"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _pack_fisher(outdir, checks, tol):
    spec = make_family("fisher_counterexample_min")
    lim = dg.fisher_min_limit(spec, tol=tol)
    s = spec.breakpoints[0]
    right = float(np.nextafter(s, 2.0))  # first point on the upper branch
    smooth = {
        "cdf_jump": float(abs(spec.cdf(right) - spec.cdf(s))),
        "density_jump": float(abs(spec.density(right) - spec.density(s))),
        "density_derivative_jump": float(abs(
            spec.density_derivative(right) - spec.density_derivative(s))),
    }
    below_ref = math.log(1.5) - 5.0 / 18.0
    doc = {
        "family": spec.name,
        "integral_below_s": lim["integral_below_s"],
        "reference_below_s": below_ref,
        "integral_above_s": lim["integral_above_s"],
        "stated_above_s": 2.77,
        "i_min": lim["i_min"],
        "stated_i_min": 2.9,
        "cramer_rao_floor": lim["cramer_rao_floor"],
        "verdict": lim["verdict"],
        "smoothness": smooth,
        "notes": ("the two stated reference constants disagree with the "
                  "computed integrals; the bounded-information conclusion "
                  "i_min < 3 is confirmed and is what the gates enforce"),
    }
    with open(os.path.join(outdir, "fisher_counterexample.json"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write(_json_doc(doc))
    _gate(checks, "fisher: lower piece equals log(3/2) - 5/18 to 1e-6",
          abs(lim["integral_below_s"] - below_ref) <= 1e-6,
          f"err {abs(lim['integral_below_s'] - below_ref):.2e}")
    _gate(checks, "fisher: seam smooth to second order (1e-10)",
          max(smooth.values()) <= 1e-10)
    _gate(checks, "fisher: limiting information finite and below 3",
          math.isfinite(lim["i_min"]) and lim["i_min"] < 3.0,
          f"i_min {lim['i_min']:.6f}")
    _gate(checks, "fisher: positive Cramer-Rao floor on unbiased location "
          "estimation", lim["cramer_rao_floor"] is not None
          and lim["cramer_rao_floor"] > 0.0)


def _cmd_paper_pack(args):
    outdir = args.out or "paper_pack"
    os.makedirs(outdir, exist_ok=True)
    checks = []
    _pack_rate(outdir, checks)
    _pack_ncp(outdir, checks, args.tol)
    _pack_vonmises(outdir, checks)
    _pack_fisher(outdir, checks, args.tol)
    failed = [name for name, ok, _ in checks if not ok]
    sys.stdout.write(f"artifacts written to {outdir}; "
                     f"{len(checks) - len(failed)}/{len(checks)} checks "
                     "passed\n")
    return 4 if failed else 0


# -------------------------------------------------------------------------
# argument plumbing
# -------------------------------------------------------------------------

def _ladder(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ladder {text!r}")


def build_parser() -> _Parser:
    p = _Parser(prog="pmblue", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", help="family name, e.g. weibull:c=2")
    common.add_argument("--n", type=int)
    common.add_argument("--n-ladder", type=_ladder,
                        help="comma separated sample sizes")
    common.add_argument("--gamma", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--theta1", type=float)
    common.add_argument("--theta2", type=float)
    common.add_argument("--replicates", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--direction", choices=["maxima", "minima"])
    common.add_argument("--tol", type=float)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--config", help="JSON file of option defaults")
    for name in ("moments", "blue", "ncp", "vonmises", "rate", "fisher",
                 "simulate", "paper-pack"):
        sub.add_parser(name, parents=[common])
    return p


_DEFAULTS = {"theta1": 0.0, "theta2": 1.0, "seed": 0,
             "direction": "maxima", "tol": DEFAULT_TOL, "format": "json"}

_CONFIG_KEYS = ("dist", "n", "n_ladder", "gamma", "delta", "theta1",
                "theta2", "replicates", "seed", "direction", "tol", "out",
                "format")


def _apply_config(args):
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("config", str(exc)) from exc
        if not isinstance(cfg, dict):
            raise CliError("config", "config file must hold a JSON object")
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest not in _CONFIG_KEYS:
                raise CliError("config", f"unknown config key {key!r}")
            if dest == "n_ladder" and isinstance(value, str):
                value = _ladder(value)
            if getattr(args, dest) is None:
                setattr(args, dest, value)
    for key, value in _DEFAULTS.items():
        if getattr(args, key) is None:
            setattr(args, key, value)


_COMMANDS = {"moments": _cmd_moments, "blue": _cmd_blue, "ncp": _cmd_ncp,
             "vonmises": _cmd_vonmises, "rate": _cmd_rate,
             "fisher": _cmd_fisher, "simulate": _cmd_simulate,
             "paper-pack": _cmd_paper_pack}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"pmblue: error: parameter={exc.parameter}: "
                         f"{exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"pmblue: error: parameter=dist: {exc}\n")
        return 2
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"pmblue: numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
