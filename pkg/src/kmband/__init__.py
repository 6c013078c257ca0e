"""Survival curves two ways, with calibrated intervals and bands.

The product-limit estimator and an EM fixed-point estimator of the same
curve live side by side so each can check the other; on top sit
log-transform pointwise confidence intervals, simultaneous confidence
bands calibrated from Brownian-bridge supremum quantiles, and a seeded
Monte Carlo coverage harness.
"""

from .core import Observation, RiskTable, StepFunction, build_risk_table, eval_step
from .em import EmTrace, MeasureSpec, e_step_objective, em_fit, em_update, m_tilde
from .inference import (
    BandSpec,
    band_constant,
    band_constant_se,
    bridge_sup_tail,
    ci_pointwise_log,
    confidence_band,
    default_band_interval,
)
from .product_limit import FitResult, fit, h_hat_at, km_estimate, log_variance_at
from .simulation import (
    CoverageReport,
    CoverageRow,
    DistSpec,
    SimConfig,
    coverage_experiment,
    example_config,
    gen_dataset,
    sample_dist,
    true_survival,
)

__version__ = "0.1.0"

__all__ = [
    "Observation",
    "RiskTable",
    "StepFunction",
    "build_risk_table",
    "eval_step",
    "FitResult",
    "km_estimate",
    "log_variance_at",
    "h_hat_at",
    "fit",
    "MeasureSpec",
    "EmTrace",
    "m_tilde",
    "em_update",
    "em_fit",
    "e_step_objective",
    "BandSpec",
    "ci_pointwise_log",
    "bridge_sup_tail",
    "band_constant",
    "band_constant_se",
    "confidence_band",
    "default_band_interval",
    "DistSpec",
    "SimConfig",
    "CoverageRow",
    "CoverageReport",
    "sample_dist",
    "gen_dataset",
    "true_survival",
    "coverage_experiment",
    "example_config",
    "__version__",
]
