"""Objective-prior Bayesian inference for the bivariate normal model."""

from .core import (
    BvnParams,
    DegenerateDataError,
    EtaParams,
    ParamFn,
    SuffStats,
    eta_from_sigma,
    log_marginal_likelihood,
    param_value,
    parse_param,
    sample_bvn,
    sigma_from_eta,
    suff_stats,
)
from .priors import (
    PI_H,
    PI_IJ,
    PI_J,
    PI_RLAMBDA,
    PI_RO,
    PI_RRHO,
    PI_RSIGMA,
    PI_RSIGMA_TILDE,
    PI_S,
    PiAB,
    PriorSpec,
    acceptance_probability,
    log_prior_density,
    parse_prior,
    ratio_to_ij,
    rejection_bound,
)
from .samplers import PosteriorSample, posterior_sample
from .inference import credible_interval, empirical_quantile, pushforward, table1_constructive
from .coverage import (
    CoverageResult,
    PivotalSpec,
    coverage_identity,
    cross_validate,
    pivotal_suffstats,
    rho_scan,
    simulate_coverage,
)

__version__ = "0.1.0"
