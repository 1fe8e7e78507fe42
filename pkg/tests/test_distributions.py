import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmblue import FAMILY_NAMES, make_family, parse_family, reflect

CONTINUOUS = ["uniform", "logistic", "negexp", "gumbel", "normal",
              "fisher_counterexample_min", "fisher_counterexample_max"]
PARAMETRIC = [("power", {"lambda": 2.0}), ("pareto", {"a": 3.0}),
              ("weibull", {"c": 0.5}), ("weibull", {"c": 2.0})]


def all_continuous():
    specs = [make_family(n) for n in CONTINUOUS]
    specs += [make_family(n, **kw) for n, kw in PARAMETRIC]
    return specs


def test_registry_lists_all_builders():
    assert "uniform" in FAMILY_NAMES
    assert len(FAMILY_NAMES) == 11


def test_parse_family_grammar():
    spec = parse_family("weibull:c=2")
    assert spec.name == "weibull" and spec.shape_params["c"] == 2.0
    spec = parse_family("pareto:a=2.5")
    assert spec.shape_params["a"] == 2.5
    with pytest.raises(ValueError):
        parse_family("pareto:a")
    with pytest.raises(ValueError):
        parse_family("nosuchfamily")


def test_pareto_requires_heavy_tail_bound():
    # second moments of maxima need a > 2
    with pytest.raises(ValueError):
        make_family("pareto", a=2.0)
    with pytest.raises(ValueError):
        make_family("weibull", c=0.0)


@pytest.mark.invariant
@pytest.mark.parametrize("spec", all_continuous(), ids=lambda s: s.name)
def test_quantile_cdf_round_trip(spec):
    # grid stays where quantiles are float-representable for every family:
    # the piecewise log-tailed pair underflows beyond u ~ 1/709
    for u in (0.01, 0.1, 1 / 3, 0.5, 2 / 3, 0.9, 0.99):
        x = spec.quantile(u)
        assert abs(spec.cdf(x) - u) < 1e-9, (spec.name, u)


@pytest.mark.invariant
@pytest.mark.parametrize("name,kw", [("logistic", {}), ("normal", {}),
                                     ("gumbel", {}), ("pareto", {"a": 3.0}),
                                     ("weibull", {"c": 2.0})])
def test_quantile_cdf_round_trip_deep_tails(name, kw):
    spec = make_family(name, **kw)
    for u in (1e-6, 1 - 1e-6):
        x = spec.quantile(u)
        assert abs(spec.cdf(x) - u) < 1e-9, (name, u)


@pytest.mark.invariant
@pytest.mark.parametrize("spec", all_continuous(), ids=lambda s: s.name)
def test_quantile_monotone_and_in_support(spec):
    us = np.linspace(0.001, 0.999, 40)
    xs = [spec.quantile(u) for u in us]
    assert all(a < b for a, b in zip(xs, xs[1:]))
    assert xs[0] >= spec.lower_endpoint and xs[-1] <= spec.upper_endpoint


@pytest.mark.invariant
@pytest.mark.parametrize("spec", all_continuous(), ids=lambda s: s.name)
def test_log_functions_match_linear_forms(spec):
    for u in (0.05, 0.4, 0.8, 0.99):
        x = spec.quantile(u)
        if spec.log_sf is not None:
            assert abs(math.exp(spec.log_sf(x)) - (1.0 - spec.cdf(x))) < 1e-12
        if spec.log_pdf is not None and spec.density is not None:
            f = spec.density(x)
            assert abs(math.exp(spec.log_pdf(x)) - f) < 1e-9 * max(1.0, f)


@pytest.mark.invariant
@pytest.mark.parametrize("spec", all_continuous(), ids=lambda s: s.name)
def test_tail_quantile_agrees_with_quantile(spec):
    if spec.tail_quantile is None:
        pytest.skip("no dedicated tail map")
    for eps in (0.2, 0.05, 1e-3, 1e-9):
        a = spec.tail_quantile(eps)
        b = spec.quantile(1.0 - eps)
        assert abs(a - b) <= 1e-7 * max(1.0, abs(a)), (spec.name, eps)


@pytest.mark.invariant
def test_tail_quantile_beats_float_cancellation():
    # beyond eps ~ 1e-16 the 1-eps form saturates; the tail map must not
    spec = make_family("pareto", a=3.0)
    x = spec.tail_quantile(1e-30)
    assert abs(x - 1e10) < 1.0
    exp_spec = make_family("weibull", c=1.0)
    assert abs(exp_spec.tail_quantile(1e-300) - 300 * math.log(10)) < 1e-9


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
@pytest.mark.invariant
def test_density_is_cdf_slope(u):
    spec = make_family("logistic")
    x = spec.quantile(u)
    h = 1e-6
    slope = (spec.cdf(x + h) - spec.cdf(x - h)) / (2 * h)
    assert abs(slope - spec.density(x)) < 1e-6


@pytest.mark.invariant
@pytest.mark.parametrize("name,kw", [("normal", {}), ("pareto", {"a": 3.0}),
                                     ("weibull", {"c": 2.0})])
def test_reflect_swaps_tails(name, kw):
    spec = make_family(name, **kw)
    r = reflect(spec)
    assert r.lower_endpoint == -spec.upper_endpoint
    assert r.upper_endpoint == -spec.lower_endpoint
    for u in (0.1, 0.5, 0.9):
        assert abs(r.quantile(u) + spec.quantile(1.0 - u)) < 1e-9
        x = r.quantile(u)
        assert abs(r.cdf(x) - u) < 1e-9
    # deep reflected lower tail must stay finite and exact
    assert abs(r.quantile(1e-20) + spec.tail_quantile(1e-20)) == 0.0


def test_reflect_is_involution_pointwise():
    spec = make_family("weibull", c=2.0)
    rr = reflect(reflect(spec))
    for u in (0.05, 0.3, 0.7, 0.95):
        assert abs(rr.quantile(u) - spec.quantile(u)) < 1e-12
        x = spec.quantile(u)
        assert abs(rr.cdf(x) - spec.cdf(x)) < 1e-12
        assert abs(rr.density(x) - spec.density(x)) < 1e-12


@pytest.mark.invariant
def test_atom_family_exposes_endpoint_mass():
    spec = make_family("atom_truncated_uniform")
    assert spec.has_atom
    assert spec.atom_at_upper_endpoint == 0.75
    assert spec.cdf(1.0) == 1.0
    assert abs(spec.cdf_left_limit(1.0) - 0.25) == 0.0
    assert spec.quantile(0.2) == 0.8
    assert spec.quantile(0.5) == 1.0


def test_counterexample_seam_values():
    spec = make_family("fisher_counterexample_min")
    s = spec.breakpoints[0]
    assert abs(s - math.exp(-2)) == 0.0
    assert abs(spec.cdf(s) - 1.0 / 3.0) < 1e-15
    # density and its slope glue smoothly across the seam
    right = float(np.nextafter(s, 2.0))
    assert abs(spec.density(right) - spec.density(s)) < 1e-10
    assert abs(spec.density_derivative(right)
               - spec.density_derivative(s)) < 1e-10


def test_counterexample_max_mirrors_min():
    mn = make_family("fisher_counterexample_min")
    mx = make_family("fisher_counterexample_max")
    for u in (0.1, 0.4, 0.7, 0.95):
        assert abs(mx.quantile(u) + mn.quantile(1.0 - u)) < 1e-12
    for x in (0.01, 0.1, 0.5, 3.0):
        assert abs(mx.cdf(-x) - (1.0 - mn.cdf(x))) < 1e-12
        assert abs(mx.density(-x) - mn.density(x)) == 0.0


def test_counterexample_tail_quantile_all_branches():
    spec = make_family("fisher_counterexample_min")
    for eps in (0.9, 2 / 3, 0.6, 0.5, 0.4, 1e-3, 1e-12, 1e-30):
        x = spec.tail_quantile(eps)
        assert abs(math.exp(spec.log_sf(x)) - eps) < 1e-9 * eps


def test_gumbel_deep_left_tail_does_not_overflow():
    spec = make_family("gumbel")
    assert spec.cdf(-800.0) == 0.0
    assert spec.density(-800.0) == 0.0
    assert math.isfinite(spec.quantile(1e-300))
