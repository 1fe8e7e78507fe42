import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pmblue import (
    PartialMaximaEstimator,
    SimulationConfig,
    check_partial_maxima,
    sample_partial_maxima,
)


def paths(direction="maxima", n=12, reps=400, theta1=0.0, theta2=1.0,
          seed=5, family="weibull", shape=None):
    c = SimulationConfig(family=family,
                         shape_params={"c": 1.0} if shape is None else shape,
                         n=n, replicates=reps, theta1=theta1, theta2=theta2,
                         seed=seed, direction=direction, estimators=())
    return sample_partial_maxima(c)


def test_check_partial_maxima_accepts_and_rejects():
    good = np.array([[0.1, 0.5, 0.5, 0.9], [1.0, 1.0, 2.0, 3.0]])
    out = check_partial_maxima(good)
    assert out.dtype == np.float64
    with pytest.raises(ValueError, match="row 1"):
        check_partial_maxima(np.array([[0.1, 0.2, 0.3], [0.5, 0.4, 0.6]]))
    with pytest.raises(ValueError):
        check_partial_maxima(good, direction="sideways")
    with pytest.raises(ValueError):
        check_partial_maxima([[1.0], [2.0]])  # single-column paths
    with pytest.raises(ValueError):
        check_partial_maxima([[0.1, np.nan, 0.3]])
    # a decreasing row is a valid minima path but not a maxima path
    down = np.array([[3.0, 2.0, 1.5]])
    check_partial_maxima(down, direction="minima")
    with pytest.raises(ValueError):
        check_partial_maxima(down)


def test_fit_predict_recovers_parameters():
    X = paths(theta1=2.0, theta2=3.0)
    est = PartialMaximaEstimator(family="weibull", shape_params={"c": 1.0})
    est.fit(X)
    theta = est.predict(X)
    assert theta.shape == (X.shape[0], 2)
    assert float(theta[:, 0].mean()) == pytest.approx(2.0, abs=0.2)
    assert float(theta[:, 1].mean()) == pytest.approx(3.0, abs=0.2)
    assert est.n_features_in_ == X.shape[1]
    assert est.location_solution_.kind == "blue_location"
    assert est.scale_solution_.theoretical_variance > 0.0


def test_blie_kind_shrinks_the_scale():
    X = paths(theta2=2.0)
    blue = PartialMaximaEstimator(family="weibull",
                                  shape_params={"c": 1.0}).fit(X)
    blie = PartialMaximaEstimator(family="weibull", shape_params={"c": 1.0},
                                  kind="blie").fit(X)
    assert blie.scale_solution_.kind == "blie_scale"
    assert blie.scale_solution_.theoretical_mse \
        < blue.scale_solution_.theoretical_variance
    # shrinkage multiplies the scale coefficient vector by 1/(1 + Var[L2])
    factor = 1.0 / (1.0 + blue.scale_solution_.theoretical_variance)
    assert np.allclose(blie.scale_solution_.coefficients,
                       factor * blue.scale_solution_.coefficients, atol=1e-9)


def test_minima_direction():
    X = paths(direction="minima", theta1=1.0, theta2=2.0, reps=600)
    est = PartialMaximaEstimator(family="weibull", shape_params={"c": 1.0},
                                 direction="minima").fit(X)
    theta = est.predict(X)
    assert float(theta[:, 0].mean()) == pytest.approx(1.0, abs=0.2)
    # unbiased in the mean; single-path scale estimates may still go negative
    assert float(theta[:, 1].mean()) == pytest.approx(2.0, abs=0.2)


def test_transform_standardizes_rows():
    X = paths(theta1=5.0, theta2=4.0)
    est = PartialMaximaEstimator(family="weibull", shape_params={"c": 1.0})
    Z = est.fit(X).transform(X)
    assert Z.shape == X.shape
    back = est.predict(X)
    assert np.allclose(Z * back[:, 1:] + back[:, :1], X, atol=1e-10)


def test_sklearn_protocol():
    est = PartialMaximaEstimator(family="uniform", kind="blie")
    params = est.get_params()
    assert params["family"] == "uniform" and params["kind"] == "blie"
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(kind="blue")
    assert est.get_params()["kind"] == "blue"
    with pytest.raises(NotFittedError):
        est.predict(np.array([[0.1, 0.2]]))


def test_fit_validates_inputs():
    X = paths(family="uniform", shape={})
    with pytest.raises(ValueError, match="kind"):
        PartialMaximaEstimator(family="uniform", kind="ble").fit(X)
    with pytest.raises(ValueError):
        PartialMaximaEstimator(family="nosuch").fit(X)
    est = PartialMaximaEstimator(family="uniform").fit(X)
    with pytest.raises(ValueError, match="length"):
        est.predict(X[:, :5])


def test_fit_length_comes_from_data():
    X8 = paths(n=8, family="uniform", shape={})
    X12 = paths(n=12, family="uniform", shape={})
    est = PartialMaximaEstimator(family="uniform").fit(X8)
    assert est.location_solution_.coefficients.shape == (8,)
    est.fit(X12)
    assert est.location_solution_.coefficients.shape == (12,)
