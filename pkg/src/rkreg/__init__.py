"""Recursive kernel regression by stochastic approximation.

Online kernel regression estimators driven by decaying stepsizes, their
iterate-averaged and ratio variants, the classical batch baselines,
confidence-interval constructions around them, closed-form asymptotic
constants, and a reproducible Monte Carlo harness for coverage experiments.
"""

from .asymptotics import (
    CltParams,
    ModelOracle,
    bias_constant,
    clt_averaged,
    clt_generalized,
    inv_n_stepsize_limit,
    nadaraya_watson_variance,
    optimal_weight_exponent,
    oracle_from_model,
    theoretical_level,
    variance_factor,
)
from .estimators import (
    NadarayaWatsonRegressor,
    RecursiveDensityEstimator,
    RecursiveDensityState,
    RecursiveKernelRegressor,
    RecursiveRatioRegressor,
    RecursiveRatioState,
    RecursiveRegressionState,
    check_contraction,
    evaluate_averaged_at,
    nadaraya_watson,
    replay_regression,
    rosenblatt_density,
)
from .exceptions import (
    ConditionViolated,
    ContractionViolation,
    DegenerateDenominator,
    DivergentXi,
    InvalidStepsize,
    PoleAtDenominator,
    RkregError,
    ZeroDensity,
)
from .intervals import Interval, averaged_interval, nw_interval
from .kernels import EPANECHNIKOV, GAUSSIAN, Kernel, get_kernel
from .sequences import (
    EstimatorConfig,
    SequenceSpec,
    ValidationReport,
    gs_exponent_estimate,
    reference_config,
    validate_assumptions,
)
from .simulation import (
    CoverageCell,
    CoverageReport,
    SimConfig,
    clt_diagnostic,
    estimate_samples,
    get_design,
    get_model,
    run_cell,
    run_table,
    sample_pair,
)

__version__ = "0.1.0"

__all__ = [
    "CltParams", "ModelOracle", "bias_constant", "clt_averaged",
    "clt_generalized", "inv_n_stepsize_limit", "nadaraya_watson_variance",
    "optimal_weight_exponent", "oracle_from_model", "theoretical_level",
    "variance_factor",
    "NadarayaWatsonRegressor", "RecursiveDensityEstimator",
    "RecursiveDensityState", "RecursiveKernelRegressor",
    "RecursiveRatioRegressor", "RecursiveRatioState",
    "RecursiveRegressionState", "check_contraction", "evaluate_averaged_at",
    "nadaraya_watson", "replay_regression", "rosenblatt_density",
    "ConditionViolated", "ContractionViolation", "DegenerateDenominator",
    "DivergentXi", "InvalidStepsize", "PoleAtDenominator", "RkregError",
    "ZeroDensity",
    "Interval", "averaged_interval", "nw_interval",
    "EPANECHNIKOV", "GAUSSIAN", "Kernel", "get_kernel",
    "EstimatorConfig", "SequenceSpec", "ValidationReport",
    "gs_exponent_estimate", "reference_config", "validate_assumptions",
    "CoverageCell", "CoverageReport", "SimConfig", "clt_diagnostic",
    "estimate_samples", "get_design", "get_model", "run_cell", "run_table",
    "sample_pair",
]
