"""Change-point detection for open/up/low/close interval time series."""

from ._oulc import (
    BootstrapResult,
    ChangePointFit,
    IntervalBar,
    LogDensityValue,
    NRConfig,
    OulcError,
    ReplicateEstimate,
    SegmentParams,
    Series,
    TruncationPolicy,
    bootstrap_ci,
    detect_oc,
    detect_oulc,
    dlogf_dsigma2,
    ingest,
    log_density_oc,
    log_density_oulc,
    mu_hats,
    run_scenario,
    simulate_series,
    tau_confidence_set,
)

__all__ = [
    "BootstrapResult",
    "ChangePointFit",
    "IntervalBar",
    "LogDensityValue",
    "NRConfig",
    "OulcError",
    "ReplicateEstimate",
    "SegmentParams",
    "Series",
    "TruncationPolicy",
    "bootstrap_ci",
    "detect_oc",
    "detect_oulc",
    "dlogf_dsigma2",
    "ingest",
    "log_density_oc",
    "log_density_oulc",
    "mu_hats",
    "run_scenario",
    "simulate_series",
    "tau_confidence_set",
]
