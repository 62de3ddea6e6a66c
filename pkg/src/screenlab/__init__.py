"""Screened instrumental-variable estimation with a binary instrument."""

from .dgp import (
    DiscreteDgpConfig,
    GaussianDgpConfig,
    Sample,
    UnitType,
    generate_discrete,
    generate_gaussian,
)
from .diagnostics import (
    RetentionEstimate,
    TnrEstimate,
    recommend,
    retention_estimate,
    retention_test,
    tnr_estimate,
    tnr_test,
)
from .errors import ScreenlabError
from .estimators import EstimateReport, estimate, wald
from .montecarlo import McSummary, RepTable, Scenario, run_scenario, size_power_run, summarize
from .power import GainReport, PowerSpec, gain_report, mde, predicted_se_ratio
from .screening import ScreenedSample, ScreenMechanism, apply_screen

__version__ = "0.1.0"

__all__ = [
    "DiscreteDgpConfig",
    "EstimateReport",
    "GainReport",
    "GaussianDgpConfig",
    "McSummary",
    "PowerSpec",
    "RepTable",
    "RetentionEstimate",
    "Sample",
    "Scenario",
    "ScreenMechanism",
    "ScreenedSample",
    "ScreenlabError",
    "TnrEstimate",
    "UnitType",
    "apply_screen",
    "estimate",
    "gain_report",
    "generate_discrete",
    "generate_gaussian",
    "mde",
    "predicted_se_ratio",
    "recommend",
    "retention_estimate",
    "retention_test",
    "run_scenario",
    "size_power_run",
    "summarize",
    "tnr_estimate",
    "tnr_test",
    "wald",
]
