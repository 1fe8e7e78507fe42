"""Monte Carlo validation harness for the linear record estimators.

Sampling is counter-based (Philox): replicate r owns the fixed block window
[r*bpr, (r+1)*bpr) of 4-double blocks, bpr = ceil(n/4), so any batch split
reproduces bit-identical paths.  Uniforms are (w + 0.5) * 2^-53 from the top
53 bits of each word, strictly inside (0,1) so quantile maps stay finite.

Minima schemes run through the reflected family: with Y = -X the j-th
partial minimum of X is minus the j-th partial maximum of Y, so coefficient
vectors are solved on the reflection and signs restored afterwards
(location estimates pick up two sign flips, scale estimates one).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.random import Philox

from ._quad import DEFAULT_TOL
from .distributions import DistributionSpec, make_family, reflect
from .moments import pm_moments_table, spacing_moments
from .solvers import (KINDS, EstimatorSolution, simple_scale_estimator,
                      solve_blie, solve_blue)

__all__ = ["SimulationConfig", "MonteCarloReport", "sample_partial_maxima",
           "run_simulation", "record_count_statistics"]

_INV_2_53 = 2.0 ** -53
_MAX_DUMP_ROWS = 100_000
_BATCH_DOUBLES = 4_000_000


@dataclass(frozen=True)
class SimulationConfig:
    """One reproducible experiment: family, parameters, size, estimators."""

    family: str
    theta1: float = 0.0
    theta2: float = 1.0
    n: int = 50
    replicates: int = 1000
    seed: int = 0
    estimators: tuple = ("blue_location", "blue_scale", "blie_location",
                         "blie_scale", "simple_scale")
    direction: str = "maxima"
    shape_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.theta2 > 0.0:
            raise ValueError(f"theta2 must be positive, got {self.theta2}")
        if self.replicates < 100:
            raise ValueError(f"need at least 100 replicates, got "
                             f"{self.replicates}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.direction not in ("maxima", "minima"):
            raise ValueError(f"direction must be maxima or minima, got "
                             f"{self.direction!r}")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        for kind in self.estimators:
            if kind not in KINDS:
                raise ValueError(f"unknown estimator kind {kind!r}")
        # record-count statistics are defined from n = 1; estimation needs
        # at least two observations
        floor = 2 if self.estimators else 1
        if self.n < floor:
            raise ValueError(f"need n >= {floor}, got {self.n}")

    @property
    def blocks_per_replicate(self) -> int:
        return (self.n + 3) // 4

    def spec(self) -> DistributionSpec:
        return make_family(self.family, **self.shape_params)


@dataclass(frozen=True)
class MonteCarloReport:
    """Empirical vs theoretical summary, one entry per estimator kind.

    Per-kind fields: empirical_mean, empirical_variance, std_error_of_mean,
    theoretical_value (risk in theta2^2 units: variance for the unbiased
    kinds, MSE for the shrinkage kinds), z_score_bias and variance_ratio.
    """

    family: str
    direction: str
    theta1: float
    theta2: float
    n: int
    replicates: int
    seed: int
    estimators: dict
    shape_params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"family": self.family, "direction": self.direction,
                "theta1": self.theta1, "theta2": self.theta2, "n": self.n,
                "replicates": self.replicates, "seed": self.seed,
                "shape_params": dict(self.shape_params),
                "estimators": {k: dict(v) for k, v in
                               self.estimators.items()}}

    @classmethod
    def from_json_dict(cls, d: dict) -> "MonteCarloReport":
        return cls(family=d["family"], direction=d["direction"],
                   theta1=float(d["theta1"]), theta2=float(d["theta2"]),
                   n=int(d["n"]), replicates=int(d["replicates"]),
                   seed=int(d["seed"]),
                   estimators={k: dict(v) for k, v in
                               d["estimators"].items()},
                   shape_params=dict(d.get("shape_params", {})))


def _uniform_blocks(config: SimulationConfig, start: int, stop: int) -> np.ndarray:
    """Uniforms for replicates [start, stop), shape (stop-start, n)."""
    bpr = config.blocks_per_replicate
    bg = Philox(key=config.seed)
    if start:
        bg.advance(start * bpr)
    raw = bg.random_raw((stop - start) * bpr * 4)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
    return u.reshape(stop - start, bpr * 4)[:, :config.n]


def _vector_quantile(spec: DistributionSpec):
    probe = np.array([0.25, 0.75])
    try:
        out = spec.quantile(probe)
        if isinstance(out, np.ndarray) and out.shape == probe.shape:
            return spec.quantile
    except (TypeError, ValueError):
        pass
    fn = np.frompyfunc(spec.quantile, 1, 1)

    def apply(u):
        return fn(u).astype(np.float64)

    return apply


def sample_partial_maxima(config: SimulationConfig, start: int = 0,
                          stop: Optional[int] = None) -> np.ndarray:
    """Record paths for replicates [start, stop), shape (stop-start, n).

    Maxima direction gives running maxima of theta1 + theta2 * X, minima
    the running minima; identical replicate indices always yield identical
    paths no matter how the work is batched.
    """
    if stop is None:
        stop = config.replicates
    if not 0 <= start <= stop <= config.replicates:
        raise ValueError(f"bad replicate window [{start}, {stop})")
    spec = config.spec()
    u = _uniform_blocks(config, start, stop)
    x = config.theta1 + config.theta2 * _vector_quantile(spec)(u)
    if config.direction == "maxima":
        return np.maximum.accumulate(x, axis=1)
    return np.minimum.accumulate(x, axis=1)


def _solve_all(config: SimulationConfig, tol: float):
    """Coefficient rows, risk values, and sign conventions per kind."""
    spec = config.spec()
    work = spec if config.direction == "maxima" else reflect(spec)
    need_pm = any(k.startswith("blue") or k.startswith("blie")
                  for k in config.estimators)
    sols = {}
    if need_pm:
        pm = pm_moments_table(work, config.n, tol=tol)
        if any(k.startswith("blue") for k in config.estimators):
            loc, scale = solve_blue(pm, family=work.name)
            sols["blue_location"], sols["blue_scale"] = loc, scale
        if any(k.startswith("blie") for k in config.estimators):
            loc, scale = solve_blie(pm, family=work.name)
            sols["blie_location"], sols["blie_scale"] = loc, scale
    if "simple_scale" in config.estimators:
        sols["simple_scale"] = simple_scale_estimator(
            spacing_moments(work, config.n, tol=tol), family=work.name)
    out = []
    for kind in config.estimators:
        sol = sols[kind]
        risk = (sol.theoretical_variance if sol.theoretical_variance
                is not None else sol.theoretical_mse)
        is_loc = kind.endswith("location")
        # minima: estimates computed on y = -x from the reflected solve;
        # theta1 = -phi1 (two flips cancel), theta2 = +phi2 (one flip)
        if config.direction == "minima":
            sign = 1.0 if is_loc else -1.0
        else:
            sign = 1.0
        target = config.theta1 if is_loc else config.theta2
        out.append((kind, sol, sign, float(risk), target))
    return out


def _evaluate_batch(kinds, paths: np.ndarray) -> np.ndarray:
    """Estimates for one batch of paths, shape (reps, len(kinds))."""
    cols = []
    diffs = None
    for kind, sol, sign, _, _ in kinds:
        if sol.basis == "spacings":
            if diffs is None:
                diffs = np.diff(paths, axis=1)
            cols.append(sign * (diffs @ sol.coefficients))
        else:
            cols.append(sign * (paths @ sol.coefficients))
    return np.column_stack(cols)


def _merge(count, mean, m2, b_count, b_mean, b_m2):
    """Chan parallel combine of (count, mean, M2) accumulators."""
    if count == 0:
        return b_count, b_mean.copy(), b_m2.copy()
    tot = count + b_count
    delta = b_mean - mean
    mean = mean + delta * (b_count / tot)
    m2 = m2 + b_m2 + delta * delta * (count * b_count / tot)
    return tot, mean, m2


def run_simulation(config: SimulationConfig, tol: float = DEFAULT_TOL,
                   dump=None) -> MonteCarloReport:
    """Run all replicates in memory-bounded batches and summarize.

    `dump` is an optional text handle; when given, per-replicate estimates
    stream into it as CSV, capped at 100000 rows.
    """
    if not config.estimators:
        raise ValueError("no estimators requested; use "
                         "record_count_statistics for sampling-only runs")
    kinds = _solve_all(config, tol)
    batch = max(1, min(config.replicates, _BATCH_DOUBLES // max(config.n, 1)))
    count, mean, m2 = 0, None, None
    dumped = 0
    if dump is not None:
        dump.write("replicate," + ",".join(k for k, *_ in kinds) + "\n")
    for start in range(0, config.replicates, batch):
        stop = min(start + batch, config.replicates)
        est = _evaluate_batch(kinds, sample_partial_maxima(config, start,
                                                           stop))
        b_count = est.shape[0]
        b_mean = est.mean(axis=0)
        b_m2 = ((est - b_mean) ** 2).sum(axis=0)
        count, mean, m2 = _merge(count, mean, m2, b_count, b_mean, b_m2)
        if dump is not None and dumped < _MAX_DUMP_ROWS:
            take = min(b_count, _MAX_DUMP_ROWS - dumped)
            for r in range(take):
                row = ",".join(f"{v:.17g}" for v in est[r])
                dump.write(f"{start + r},{row}\n")
            dumped += take
    var = m2 / (count - 1)
    se = np.sqrt(var / count)
    summary = {}
    for j, (kind, sol, sign, risk, target) in enumerate(kinds):
        summary[kind] = {
            "empirical_mean": float(mean[j]),
            "empirical_variance": float(var[j]),
            "std_error_of_mean": float(se[j]),
            "theoretical_value": risk,
            "z_score_bias": float((mean[j] - target) / se[j]),
            "variance_ratio": float(var[j]
                                    / (risk * config.theta2 ** 2)),
        }
    return MonteCarloReport(
        family=config.family, direction=config.direction,
        theta1=config.theta1, theta2=config.theta2, n=config.n,
        replicates=config.replicates, seed=config.seed,
        estimators=summary, shape_params=dict(config.shape_params))


def record_count_statistics(config: SimulationConfig) -> dict:
    """Mean number of distinct values along the record paths.

    For continuous families this is the mean record count, ~ H_n; a single
    observation always counts exactly one distinct value.
    """
    batch = max(1, min(config.replicates, _BATCH_DOUBLES // max(config.n, 1)))
    total = 0.0
    for start in range(0, config.replicates, batch):
        stop = min(start + batch, config.replicates)
        paths = sample_partial_maxima(config, start, stop)
        if config.n == 1:
            total += float(paths.shape[0])
            continue
        steps = np.diff(paths, axis=1)
        moved = (steps > 0.0) if config.direction == "maxima" else (steps < 0.0)
        total += float((1 + moved.sum(axis=1)).sum())
    return {"mean_distinct_values": total / config.replicates}


def replicates_from_csv(fh) -> dict:
    """Read a per-replicate dump back into {kind: estimates array}."""
    header = fh.readline().strip().split(",")
    if header[:1] != ["replicate"]:
        raise ValueError("not a replicate dump")
    rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(v) for v in r] for r in rows])
    return {kind: data[:, j + 1] for j, kind in enumerate(header[1:])}
