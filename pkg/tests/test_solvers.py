import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmblue import (
    EstimatorSolution,
    IllConditionedWarning,
    SpacingMoments,
    PartialMaximaMoments,
    UniformClosedForm,
    simple_scale_estimator,
    solve_blie,
    solve_blie_spacings,
    solve_blue,
    solve_blue_spacings,
    spacing_moments,
    to_partial_maxima_basis,
    uniform_closed_form,
)
from pmblue.solvers import evaluate


def uniform_spacings(n):
    """Exact uniform spacing moments assembled from the closed-form table."""
    pm = UniformClosedForm(n).moments
    m = np.diff(pm.mu)
    k = n - 1
    s = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            s[a, b] = (pm.sigma[a + 1, b + 1] - pm.sigma[a + 1, b]
                       - pm.sigma[a, b + 1] + pm.sigma[a, b])
    return SpacingMoments(n=n, m=m, s_mat=s, d_mat=s + np.outer(m, m))


# -------------------------------------------------------------------------
# the n = 2 uniform case solves by hand
# -------------------------------------------------------------------------

def test_uniform_pair_all_five_estimators():
    pm = UniformClosedForm(2).moments
    sm = uniform_spacings(2)

    loc, scale = solve_blue(pm)
    assert np.allclose(loc.coefficients, [4.0, -3.0], atol=1e-12)
    assert loc.theoretical_variance == pytest.approx(5.0 / 6.0, abs=1e-12)
    assert np.allclose(scale.coefficients, [-6.0, 6.0], atol=1e-12)
    assert scale.theoretical_variance == pytest.approx(2.0, abs=1e-12)

    iloc, iscale = solve_blie(pm)
    assert np.allclose(iloc.coefficients, [1.5, -0.5], atol=1e-12)
    assert iloc.theoretical_mse == pytest.approx(5.0 / 16.0, abs=1e-12)
    assert np.allclose(iscale.coefficients, [-2.0, 2.0], atol=1e-12)
    assert iscale.theoretical_mse == pytest.approx(2.0 / 3.0, abs=1e-12)

    sb = solve_blue_spacings(sm)
    assert np.allclose(sb.coefficients, [6.0], atol=1e-12)
    assert sb.theoretical_variance == pytest.approx(2.0, abs=1e-12)

    ib = solve_blie_spacings(sm)
    assert np.allclose(ib.coefficients, [2.0], atol=1e-12)
    assert ib.blie_ratio_a == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert ib.theoretical_mse == pytest.approx(2.0 / 3.0, abs=1e-12)

    u2 = simple_scale_estimator(sm)
    # with one spacing the diagonal weighting is the BLUE
    assert np.allclose(u2.coefficients, [6.0], atol=1e-12)
    assert u2.theoretical_variance == pytest.approx(2.0, abs=1e-12)
    assert u2.variance_bound == pytest.approx(2.0, abs=1e-12)


def test_orthonormal_design_by_hand():
    pm = PartialMaximaMoments.from_mu_sigma([0.0, 1.0], np.eye(2))
    loc, scale = solve_blue(pm)
    assert np.allclose(loc.coefficients, [1.0, 0.0])
    assert np.allclose(scale.coefficients, [-1.0, 1.0])
    assert loc.theoretical_variance == pytest.approx(1.0)
    assert scale.theoretical_variance == pytest.approx(2.0)
    iloc, iscale = solve_blie(pm)
    assert np.allclose(iloc.coefficients, [2.0 / 3.0, 1.0 / 3.0])
    assert iloc.theoretical_mse == pytest.approx(2.0 / 3.0)
    assert np.allclose(iscale.coefficients, [-1.0 / 3.0, 1.0 / 3.0])
    assert iscale.theoretical_mse == pytest.approx(2.0 / 3.0)


# -------------------------------------------------------------------------
# structural identities, property-checked over the sample size
# -------------------------------------------------------------------------

@given(st.integers(min_value=2, max_value=24))
@pytest.mark.invariant
def test_blue_pair_is_unbiased(n):
    pm = UniformClosedForm(n).moments
    loc, scale = solve_blue(pm)
    ones = np.ones(n)
    assert ones @ loc.coefficients == pytest.approx(1.0, abs=1e-7)
    assert pm.mu @ loc.coefficients == pytest.approx(0.0, abs=1e-7)
    assert ones @ scale.coefficients == pytest.approx(0.0, abs=1e-7)
    assert pm.mu @ scale.coefficients == pytest.approx(1.0, abs=1e-7)


@given(st.integers(min_value=2, max_value=24))
@pytest.mark.invariant
def test_invariant_estimators_dominate_unbiased_ones(n):
    pm = UniformClosedForm(n).moments
    loc, scale = solve_blue(pm)
    iloc, iscale = solve_blie(pm)
    assert iloc.theoretical_mse < loc.theoretical_variance
    assert iscale.theoretical_mse < scale.theoretical_variance
    assert loc.theoretical_variance > 0
    assert iloc.theoretical_mse > 0


@given(st.integers(min_value=2, max_value=24))
@pytest.mark.invariant
def test_spacing_shrinkage_identity(n):
    # the invariant scale estimator is a deterministic shrink of the
    # unbiased one: b_T = a b_L with a = q/(1+q) in (0,1)
    sm = uniform_spacings(n)
    le = solve_blue_spacings(sm)
    ie = solve_blie_spacings(sm)
    q = 1.0 / le.theoretical_variance
    a = ie.blie_ratio_a
    assert 0.0 < a < 1.0
    assert a == pytest.approx(q / (1.0 + q), abs=1e-10)
    assert np.max(np.abs(ie.coefficients - a * le.coefficients)) < 1e-9
    assert ie.theoretical_mse == pytest.approx(1.0 - a, abs=1e-10)


@given(st.integers(min_value=3, max_value=24))
@pytest.mark.invariant
def test_diagonal_weighting_never_beats_blue(n):
    sm = uniform_spacings(n)
    best = solve_blue_spacings(sm)
    simple = simple_scale_estimator(sm)
    assert simple.theoretical_variance >= best.theoretical_variance - 1e-12
    # negatively correlated spacings pull the exact variance below the
    # independence bound
    assert simple.theoretical_variance <= simple.variance_bound + 1e-12
    assert np.all(simple.coefficients > 0.0)


@given(st.integers(min_value=2, max_value=20))
@pytest.mark.invariant
def test_both_scale_routes_agree(n):
    # X* basis solve and spacings solve are reparametrizations of the same
    # quadratic program
    pm = UniformClosedForm(n).moments
    sm = uniform_spacings(n)
    _, scale = solve_blue(pm)
    translated = to_partial_maxima_basis(solve_blue_spacings(sm))
    assert np.max(np.abs(scale.coefficients - translated.coefficients)) < 1e-7
    assert scale.theoretical_variance == pytest.approx(
        translated.theoretical_variance, rel=1e-9)


def test_scale_variance_matches_collapsed_scalars():
    for n in (10, 30):
        cf = uniform_closed_form(n)
        _, scale = solve_blue(cf.moments)
        loc, _ = solve_blue(cf.moments)
        assert scale.theoretical_variance == pytest.approx(cf.var_L2, rel=1e-8)
        assert loc.theoretical_variance == pytest.approx(cf.var_L1, rel=1e-8)


@pytest.mark.invariant
def test_basis_translation_preserves_the_estimate(exp_spec):
    sm = spacing_moments(exp_spec, 6)
    sol = solve_blue_spacings(sm)
    moved = to_partial_maxima_basis(sol)
    assert moved.basis == "partial_maxima"
    assert moved.coefficients.shape == (6,)
    assert np.sum(moved.coefficients) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(7)
    for _ in range(5):
        path = np.sort(rng.standard_normal(6))
        assert evaluate(sol, path) == pytest.approx(evaluate(moved, path),
                                                    abs=1e-12)
    with pytest.raises(ValueError):
        to_partial_maxima_basis(moved)


def test_exponential_blie_beats_blue_on_spacings(exp_spec):
    sm = spacing_moments(exp_spec, 8)
    le = solve_blue_spacings(sm)
    ie = solve_blie_spacings(sm)
    u2 = simple_scale_estimator(sm)
    assert ie.theoretical_mse < le.theoretical_variance
    assert u2.theoretical_variance >= le.theoretical_variance
    assert u2.theoretical_variance <= u2.variance_bound


# -------------------------------------------------------------------------
# serialization, evaluation, failure modes
# -------------------------------------------------------------------------

def test_solution_dict_round_trip():
    sm = uniform_spacings(4)
    for sol in (solve_blue_spacings(sm, family="uniform"),
                solve_blie_spacings(sm, family="uniform"),
                simple_scale_estimator(sm)):
        back = EstimatorSolution.from_dict(sol.to_dict())
        assert back.kind == sol.kind and back.basis == sol.basis
        assert np.array_equal(back.coefficients, sol.coefficients)
        assert back.theoretical_variance == sol.theoretical_variance
        assert back.theoretical_mse == sol.theoretical_mse
        assert back.blie_ratio_a == sol.blie_ratio_a
        assert back.variance_bound == sol.variance_bound


def test_solution_validates_construction():
    with pytest.raises(ValueError):
        EstimatorSolution(kind="nope", basis="spacings",
                          coefficients=np.ones(3), n=4)
    with pytest.raises(ValueError):
        EstimatorSolution(kind="blue_scale", basis="nope",
                          coefficients=np.ones(3), n=4)
    with pytest.raises(ValueError):
        EstimatorSolution(kind="blue_scale", basis="spacings",
                          coefficients=np.ones(4), n=4)
    sol = EstimatorSolution(kind="blue_scale", basis="spacings",
                            coefficients=np.ones(3), n=4)
    with pytest.raises(ValueError):
        sol.coefficients[0] = 2.0


def test_evaluate_checks_the_path():
    pm = UniformClosedForm(3).moments
    _, scale = solve_blue(pm)
    assert np.isfinite(evaluate(scale, [0.1, 0.5, 0.9]))
    with pytest.raises(ValueError):
        evaluate(scale, [0.1, 0.5])
    with pytest.raises(ValueError):
        evaluate(scale, [0.5, 0.4, 0.9])
    with pytest.raises(ValueError):
        evaluate(scale, [0.1, np.nan, 0.9])


def test_degenerate_inputs_raise():
    m = np.zeros(2)
    s = np.eye(2)
    sm = SpacingMoments(n=3, m=m, s_mat=s, d_mat=s + np.outer(m, m))
    with pytest.raises(ArithmeticError):
        solve_blue_spacings(sm)
    bad = SpacingMoments(n=3, m=np.array([1.0, 1.0]),
                         s_mat=np.array([[1.0, 0.0], [0.0, -1.0]]),
                         d_mat=np.array([[2.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ArithmeticError):
        simple_scale_estimator(bad)


def test_near_singular_matrix_warns():
    eps = 1e-14
    m = np.array([1.0, 1.0])
    s = np.array([[1.0, 1.0 - eps], [1.0 - eps, 1.0]])
    sm = SpacingMoments(n=3, m=m, s_mat=s, d_mat=s + np.outer(m, m))
    with pytest.warns(IllConditionedWarning):
        solve_blue_spacings(sm)
