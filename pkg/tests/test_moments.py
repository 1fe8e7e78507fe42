import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from pmblue import (
    PartialMaximaMoments,
    UniformClosedForm,
    beta_tail_asymptotics_check,
    make_family,
    moments_from_csv,
    moments_to_csv,
    pm_cov,
    pm_mean,
    pm_moments_table,
    spacing_mean,
    spacing_moments,
    spacing_second_moment,
    uniform_closed_form,
    uniform_rate_scalars,
)
from pmblue.moments import TridiagonalMatrix, clear_cache

EULER = 0.5772156649015329


def harmonic(i):
    return float(sum(Fraction(1, r) for r in range(1, i + 1)))


# -------------------------------------------------------------------------
# closed-form oracles per family
# -------------------------------------------------------------------------

@pytest.mark.parametrize("i", [1, 2, 3, 7])
def test_exponential_running_max_mean_is_harmonic(exp_spec, i):
    assert abs(pm_mean(exp_spec, i) - harmonic(i)) < 1e-9


@pytest.mark.parametrize("i", [1, 2, 5])
def test_negexp_running_max_mean(i):
    # -log of a uniform running minimum: mean is exactly -1/i
    assert abs(pm_mean(make_family("negexp"), i) + 1.0 / i) < 1e-10


def test_gumbel_running_max_shifts_by_log_i():
    spec = make_family("gumbel")
    assert abs(pm_mean(spec, 1) - EULER) < 1e-9
    assert abs(pm_mean(spec, 5) - (EULER + math.log(5))) < 1e-9
    assert abs(pm_cov(spec, 3, 3) - math.pi ** 2 / 6.0) < 1e-8


def test_logistic_running_max_digamma_forms():
    spec = make_family("logistic")
    for i in (1, 2, 4):
        assert abs(pm_mean(spec, i) - (sp.digamma(i) + EULER)) < 1e-9
        var = sp.polygamma(1, i) + math.pi ** 2 / 6.0
        assert abs(pm_cov(spec, i, i) - var) < 1e-8


def test_normal_pair_and_triple_maxima():
    spec = make_family("normal")
    assert abs(pm_mean(spec, 2) - 1.0 / math.sqrt(math.pi)) < 1e-9
    assert abs(pm_mean(spec, 3) - 1.5 / math.sqrt(math.pi)) < 1e-9
    assert abs(pm_cov(spec, 2, 2) - (1.0 - 1.0 / math.pi)) < 1e-8


@pytest.mark.parametrize("i", [1, 2, 4])
def test_pareto_moments_are_beta_functions(i):
    a = 3.0
    spec = make_family("pareto", a=a)
    mean = i * math.exp(sp.betaln(i, 1.0 - 1.0 / a))
    second = i * math.exp(sp.betaln(i, 1.0 - 2.0 / a))
    assert abs(pm_mean(spec, i) - mean) < 1e-9
    assert abs(pm_cov(spec, i, i) - (second - mean ** 2)) < 1e-8


def test_exponential_spacing_moments_exact(exp_spec):
    for k in (1, 2, 3, 10):
        assert abs(spacing_mean(exp_spec, k) - 1.0 / (k + 1)) < 1e-10
        assert abs(spacing_second_moment(exp_spec, k) - 2.0 / (k + 1)) < 1e-9


def test_large_index_substitution_path(exp_spec):
    # indexes beyond 50 integrate in the w = u^(k+1) variable
    assert abs(spacing_mean(exp_spec, 60) - 1.0 / 61) < 1e-10
    assert abs(spacing_second_moment(exp_spec, 60) - 2.0 / 61) < 1e-9
    assert abs(pm_mean(exp_spec, 80) - harmonic(80)) < 5e-9


def test_exponential_adjacent_spacings_are_correlated(exp_spec):
    sm = spacing_moments(exp_spec, 3)
    assert abs(sm.s_mat[0, 1] - (-1.0 / 12.0)) < 1e-9


def test_uniform_adjacent_spacing_covariance():
    sm = spacing_moments(make_family("uniform"), 3, method="adaptive")
    assert abs(sm.s_mat[0, 1] - (-1.0 / 180.0)) < 1e-9


def test_atom_family_first_moments():
    spec = make_family("atom_truncated_uniform")
    assert abs(pm_mean(spec, 1) - 7.0 / 8.0) < 1e-10
    assert abs(pm_cov(spec, 1, 1) - 13.0 / 192.0) < 1e-9


def test_atom_family_spacing_covariance_rational():
    spec = make_family("atom_truncated_uniform")
    sm = spacing_moments(spec, 3)
    assert abs(sm.s_mat[0, 1] - 59.0 / 184320.0) < 1e-9


# -------------------------------------------------------------------------
# uniform closed form vs quadrature
# -------------------------------------------------------------------------

def exact_uniform_sigma(i, j):
    i, j = min(i, j), max(i, j)
    return Fraction(i, (i + 1) * (j + 1) * (j + 2))


def test_uniform_quadrature_matches_rationals(uniform_spec):
    pm = pm_moments_table(uniform_spec, 6, method="adaptive")
    for i in range(1, 7):
        assert abs(pm.mu[i - 1] - float(Fraction(i, i + 1))) < 1e-9
        for j in range(i, 7):
            assert abs(pm.sigma[i - 1, j - 1]
                       - float(exact_uniform_sigma(i, j))) < 1e-9


def test_uniform_closed_form_table():
    cf = uniform_closed_form(12)
    pm = cf.moments
    for i in (1, 5, 12):
        assert pm.mu[i - 1] == pytest.approx(i / (i + 1.0), abs=1e-15)
    assert pm.sigma[2, 7] == pytest.approx(float(exact_uniform_sigma(3, 8)),
                                           abs=1e-15)


@pytest.mark.invariant
def test_uniform_tridiagonal_is_the_inverse():
    cf = UniformClosedForm(25)
    prod = cf.moments.sigma @ cf.sigma_inverse.toarray()
    assert np.max(np.abs(prod - np.eye(25))) < 1e-8


@pytest.mark.invariant
def test_collapsed_rate_scalars_match_dense_solves():
    n = 40
    cf = UniformClosedForm(n)
    sigma = cf.moments.sigma
    one = np.ones(n)
    w = 1.0 - cf.moments.mu
    x1 = np.linalg.solve(sigma, one)
    xw = np.linalg.solve(sigma, w)
    a, b, c = uniform_rate_scalars(n)
    assert a == pytest.approx(one @ x1, rel=1e-8)
    assert b == pytest.approx(w @ xw, rel=1e-8)
    assert c == pytest.approx(w @ x1, rel=1e-8)


@pytest.mark.invariant
def test_scale_variance_declines_with_sample_size():
    vals = [UniformClosedForm(n).var_L2 for n in (5, 10, 50, 400, 3000)]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_tridiagonal_helpers_match_dense():
    m = TridiagonalMatrix([2.0, 3.0, 4.0, 5.0], [-1.0, -0.5, 0.25])
    dense = m.toarray()
    x = np.random.standard_normal(4)
    y = np.random.standard_normal(4)
    assert np.allclose(m.matvec(x), dense @ x)
    assert m.quad_form(x, y) == pytest.approx(x @ dense @ y)
    assert m.quad_form(x) == pytest.approx(x @ dense @ x)
    with pytest.raises(ValueError):
        TridiagonalMatrix([1.0, 2.0], [0.1, 0.2])


# -------------------------------------------------------------------------
# structural invariants of the tables
# -------------------------------------------------------------------------

@pytest.mark.invariant
def test_tables_are_symmetric_psd_with_monotone_means(sweep_specs):
    for spec in sweep_specs:
        pm = pm_moments_table(spec, 6)
        assert np.array_equal(pm.sigma, pm.sigma.T)
        assert np.all(np.diff(pm.mu) > 0)
        assert np.linalg.eigvalsh(pm.sigma)[0] > -1e-10
        assert np.allclose(pm.second_moment,
                           pm.sigma + np.outer(pm.mu, pm.mu))


@pytest.mark.invariant
def test_spacing_means_are_mean_increments(sweep_specs):
    for spec in sweep_specs[:4]:
        pm = pm_moments_table(spec, 5)
        sm = spacing_moments(spec, 5)
        assert np.max(np.abs(sm.m - np.diff(pm.mu))) < 1e-9, spec.name


@pytest.mark.invariant
def test_spacing_diagonal_two_routes_agree(exp_spec):
    # direct double integral vs the four-term combination of sigma entries
    sm = spacing_moments(exp_spec, 5)
    pm = pm_moments_table(exp_spec, 5)
    sig = pm.sigma
    for k in range(1, 5):
        combo = (sig[k, k] - 2.0 * sig[k - 1, k] + sig[k - 1, k - 1])
        assert abs(sm.s_mat[k - 1, k - 1] - combo) < 1e-10


@pytest.mark.invariant
def test_spacing_second_moment_matrix_identity(exp_spec):
    sm = spacing_moments(exp_spec, 4)
    assert np.allclose(sm.d_mat, sm.s_mat + np.outer(sm.m, sm.m), atol=1e-14)


@given(st.integers(min_value=1, max_value=30))
@pytest.mark.invariant
def test_uniform_spacing_mean_closed_form(k):
    # uniform spacings have mean 1/((k+1)(k+2)) = mu_{k+1} - mu_k
    spec = make_family("uniform")
    assert abs(spacing_mean(spec, k) - 1.0 / ((k + 1) * (k + 2))) < 1e-10


def test_extension_property_restrict(exp_spec):
    big = pm_moments_table(exp_spec, 8)
    small = pm_moments_table(exp_spec, 4)
    cut = big.restrict(4)
    assert np.array_equal(cut.mu, small.mu)
    assert np.array_equal(cut.sigma, small.sigma)
    with pytest.raises(ValueError):
        big.restrict(9)
    with pytest.raises(ValueError):
        big.restrict(0)


def test_tables_are_write_protected(exp_spec):
    pm = pm_moments_table(exp_spec, 3)
    with pytest.raises(ValueError):
        pm.mu[0] = 0.0
    with pytest.raises(ValueError):
        pm.sigma[0, 0] = 1.0


def test_cache_returns_identical_values(exp_spec):
    clear_cache()
    a = pm_moments_table(exp_spec, 4)
    b = pm_moments_table(exp_spec, 4)
    assert np.array_equal(a.mu, b.mu) and np.array_equal(a.sigma, b.sigma)


def test_grid_and_adaptive_paths_agree():
    spec = make_family("logistic")
    pm = pm_moments_table(spec, 60)  # auto picks the grid route past n=48
    assert abs(pm.mu[0] - pm_mean(spec, 1)) < 1e-8
    assert abs(pm.mu[59] - pm_mean(spec, 60)) < 1e-8
    assert abs(pm.sigma[0, 0] - pm_cov(spec, 1, 1)) < 1e-8
    assert abs(pm.sigma[6, 18] - pm_cov(spec, 7, 19)) < 1e-8
    assert abs(pm.sigma[59, 59] - pm_cov(spec, 60, 60)) < 1e-8


def test_grid_method_rejects_unsupported_families():
    with pytest.raises(ValueError):
        pm_moments_table(make_family("atom_truncated_uniform"), 4, method="grid")
    with pytest.raises(ValueError):
        pm_moments_table(make_family("uniform"), 4, method="typo")


# -------------------------------------------------------------------------
# serialization and the tail limit helper
# -------------------------------------------------------------------------

def test_moments_csv_round_trip_is_exact(exp_spec):
    pm = pm_moments_table(exp_spec, 5)
    buf = io.StringIO()
    moments_to_csv(pm, buf)
    buf.seek(0)
    back = moments_from_csv(buf)
    assert back.n == pm.n
    assert np.array_equal(back.mu, pm.mu)
    assert np.array_equal(back.sigma, pm.sigma)


def test_moments_csv_rejects_foreign_header():
    with pytest.raises(ValueError):
        moments_from_csv(io.StringIO("a,b,c\n1,2,3\n"))


def test_from_mu_sigma_sets_second_moment():
    pm = PartialMaximaMoments.from_mu_sigma([0.5, 0.75], [[1.0, 0.1], [0.1, 2.0]])
    assert pm.second_moment[0, 1] == pytest.approx(0.1 + 0.5 * 0.75)


@pytest.mark.invariant
@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_scaled_beta_ratio_approaches_gamma(t):
    rows = beta_tail_asymptotics_check(t, [10, 100, 1000])
    target = math.gamma(1.0 + t)
    errs = [abs(r["value"] - target) / target for r in rows]
    assert errs[-1] < 0.01
    assert errs[0] > errs[-1] or t == 0.0
    assert rows[-1]["target"] == target


def test_validation_errors():
    spec = make_family("uniform")
    with pytest.raises(ValueError):
        pm_mean(spec, 0)
    with pytest.raises(ValueError):
        pm_cov(spec, 3, 2)
    with pytest.raises(ValueError):
        spacing_mean(spec, 0)
    with pytest.raises(ValueError):
        pm_moments_table(spec, 1)
    with pytest.raises(ValueError):
        spacing_moments(spec, 1)
    with pytest.raises(ValueError):
        beta_tail_asymptotics_check(-1.0, [10])
    with pytest.raises(ValueError):
        uniform_rate_scalars(1)
