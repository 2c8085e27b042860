"""Exact and Monte Carlo risk analysis of ridge regression versus
PCA-truncated least squares in the fixed-design linear model."""

from .errors import (
    ConfigError,
    ConsistencyError,
    NumericalError,
    SingularMatrixError,
    ValidationError,
)
from .estimators import (
    Estimate,
    Method,
    Observation,
    fit_batch,
    ols_fit,
    pca_ols_fit,
    ridge_fit,
    shrinkage_factors,
)
from .model import (
    ProblemInstance,
    RotatedProblem,
    SecondMoment,
    Spectrum,
    eigendecompose,
    expected_loss,
    rotate_problem,
    second_moment,
    sigma_norm_sq,
)
from .montecarlo import (
    EmpiricalRisk,
    EmpiricalSplit,
    NoiseKind,
    NoiseModel,
    draw_noise,
    empirical_decomposition,
    empirical_risk,
    empirical_sweep,
    sample_observation,
    trial_stream,
)
from .risk import (
    BOUND_TOLERANCE,
    RISK_INFLATION_BOUND,
    InflationCertificate,
    RiskReport,
    SweepResult,
    SweepRow,
    decompose_risk,
    inflation_certificate,
    lambda_sweep,
    pca_risk,
    ridge_risk,
)
from .scenarios import (
    SignalKind,
    SignalSpec,
    SpectrumKind,
    SpectrumSpec,
    build_instance,
    scenario_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BOUND_TOLERANCE",
    "ConfigError",
    "ConsistencyError",
    "Estimate",
    "EmpiricalRisk",
    "EmpiricalSplit",
    "InflationCertificate",
    "Method",
    "NoiseKind",
    "NoiseModel",
    "NumericalError",
    "Observation",
    "ProblemInstance",
    "RISK_INFLATION_BOUND",
    "RiskReport",
    "RotatedProblem",
    "SecondMoment",
    "SignalKind",
    "SignalSpec",
    "SingularMatrixError",
    "Spectrum",
    "SpectrumKind",
    "SpectrumSpec",
    "SweepResult",
    "SweepRow",
    "ValidationError",
    "build_instance",
    "decompose_risk",
    "draw_noise",
    "eigendecompose",
    "empirical_decomposition",
    "empirical_risk",
    "empirical_sweep",
    "expected_loss",
    "fit_batch",
    "inflation_certificate",
    "lambda_sweep",
    "ols_fit",
    "pca_ols_fit",
    "pca_risk",
    "ridge_fit",
    "ridge_risk",
    "rotate_problem",
    "sample_observation",
    "scenario_grid",
    "second_moment",
    "shrinkage_factors",
    "sigma_norm_sq",
    "trial_stream",
]
