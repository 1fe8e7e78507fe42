"""Best linear estimation of location and scale from record paths.

The observable is the sequence of partial maxima (or minima) of an i.i.d.
sample from a location-scale family: X*_j = max(X_1, ..., X_j).  This
package computes exact moment tables of those records, solves the
minimum-variance unbiased (BLUE) and minimum-MSE invariant (BLIE)
coefficient systems on both the record and the spacing basis, and ships
the diagnostics that decide when such estimation can work at all:
spacing-correlation checks, generalized hazard profiles, variance-rate
studies, Fisher information of record data, and an endpoint-atom test.

A Monte Carlo harness with counter-based (reproducible, splittable)
sampling validates the theory numerically, and `pmblue` exposes everything
on the command line.
"""
from ._quad import QuadratureError
from .distributions import (DistributionSpec, FAMILY_NAMES, make_family,
                            parse_family, reflect)
from .moments import (PartialMaximaMoments, SpacingMoments,
                      UniformClosedForm, beta_tail_asymptotics_check,
                      moments_from_csv, moments_to_csv, pm_cov, pm_mean,
                      pm_moments_table, spacing_mean, spacing_moments,
                      spacing_second_moment, uniform_closed_form,
                      uniform_rate_scalars)
from .solvers import (EstimatorSolution, IllConditionedWarning,
                      simple_scale_estimator, solve_blie,
                      solve_blie_spacings, solve_blue, solve_blue_spacings,
                      to_partial_maxima_basis)
from .diagnostics import (FisherReport, NcpReport, RateStudy,
                          VonMisesProfile, consistency_criterion,
                          endpoint_atom_check, fisher_information,
                          fisher_min_limit, ncp_check, rate_study,
                          von_mises_profile)
from .simulate import (MonteCarloReport, SimulationConfig,
                       record_count_statistics, run_simulation,
                       sample_partial_maxima)
from .estimator import PartialMaximaEstimator, check_partial_maxima

__version__ = "0.1.0"

__all__ = [
    "QuadratureError",
    "DistributionSpec", "FAMILY_NAMES", "make_family", "parse_family",
    "reflect",
    "PartialMaximaMoments", "SpacingMoments", "UniformClosedForm",
    "beta_tail_asymptotics_check", "moments_from_csv", "moments_to_csv",
    "pm_cov", "pm_mean", "pm_moments_table", "spacing_mean",
    "spacing_moments", "spacing_second_moment", "uniform_closed_form",
    "uniform_rate_scalars",
    "EstimatorSolution", "IllConditionedWarning", "simple_scale_estimator",
    "solve_blie", "solve_blie_spacings", "solve_blue",
    "solve_blue_spacings", "to_partial_maxima_basis",
    "FisherReport", "NcpReport", "RateStudy", "VonMisesProfile",
    "consistency_criterion", "endpoint_atom_check", "fisher_information",
    "fisher_min_limit", "ncp_check", "rate_study", "von_mises_profile",
    "MonteCarloReport", "SimulationConfig", "record_count_statistics",
    "run_simulation", "sample_partial_maxima",
    "PartialMaximaEstimator", "check_partial_maxima",
    "__version__",
]
