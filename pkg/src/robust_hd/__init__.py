"""Winsorized and trimmed mean statistics for heavy-tailed, contaminated
high-dimensional data, with Gaussian and multiplier-bootstrap calibration."""

__version__ = "0.1.0"

from .contamination import AdversarySpec, apply_adversary, register_adversary
from .covariance import (
    FeasibilityReport,
    RobustCovariance,
    correlation_normalize,
    feasibility_condition,
    winsorized_covariance,
    winsorized_residuals,
)
from .errors import (
    ArgumentError,
    DegenerateScaleError,
    NumericError,
    PreconditionError,
    RobustHDError,
)
from .estimators import (
    EpsilonSchedule,
    MeanStatistic,
    centered_sample_mean,
    epsilon_schedule,
    normalized_winsorized_mean,
    schedule_from_epsilon,
    trimmed_mean,
    winsorized_location,
    winsorized_mean,
)
from .sampler import (
    CriticalValue,
    GaussianSpec,
    bootstrap_critical_value,
    max_quantile_diagonal,
    multiplier_bootstrap_draw,
    stream,
)
from .simlab import ReplicationSummary, ScenarioConfig, run_scenario
from .theory import c_constants, lambert_w0, lambert_wm1, rate_bound, sharp_feasibility

__all__ = [
    "AdversarySpec",
    "ArgumentError",
    "CriticalValue",
    "DegenerateScaleError",
    "EpsilonSchedule",
    "FeasibilityReport",
    "GaussianSpec",
    "MeanStatistic",
    "NumericError",
    "PreconditionError",
    "ReplicationSummary",
    "RobustCovariance",
    "RobustHDError",
    "ScenarioConfig",
    "apply_adversary",
    "bootstrap_critical_value",
    "c_constants",
    "centered_sample_mean",
    "correlation_normalize",
    "epsilon_schedule",
    "feasibility_condition",
    "lambert_w0",
    "lambert_wm1",
    "max_quantile_diagonal",
    "multiplier_bootstrap_draw",
    "normalized_winsorized_mean",
    "rate_bound",
    "register_adversary",
    "run_scenario",
    "schedule_from_epsilon",
    "sharp_feasibility",
    "stream",
    "trimmed_mean",
    "winsorized_covariance",
    "winsorized_location",
    "winsorized_mean",
    "winsorized_residuals",
]
