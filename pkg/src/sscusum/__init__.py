"""Self-starting CUSUM charts for the mean of Normal data.

Two schemes that monitor from the very first observation, estimating the
unknown mean and variance as data accrue: the frequentist self-starting
CUSUM (SSC) and the Bayesian predictive ratio CUSUM (PRC) under a
Normal-Inverse-Gamma prior. A deterministic Monte Carlo engine calibrates
decision limits to a target in-control average run length and estimates
conditional expected detection delays across change-point scenarios.
"""

__version__ = "0.1.0"

from .calibrate import ArlCurve, CalibrationResult, CalibrationSpec, calibrate_h
from .charts import (
    ChartConfig,
    CusumPair,
    NIGParams,
    PrcState,
    RunningStats,
    SscState,
    StepResult,
    cusum_step,
    ic_predictive,
    log_predictive_ratio,
    new_state,
    nig_update,
    prc_step,
    running_stats_update,
    ssc_normalize,
    ssc_standardize,
    ssc_step,
    step,
)
from .experiment import (
    GridResult,
    GridRow,
    GridSpec,
    emit_figure_data,
    emit_table,
    run_grid,
)
from .kernels import BACKEND
from .metrics import ArlEstimate, CedEstimate, estimate_arl0, estimate_ced
from .simulate import (
    RunOutcome,
    ScenarioSpec,
    gen_observation,
    run_envelope,
    run_once,
    substream,
)

__all__ = [
    "ArlCurve",
    "ArlEstimate",
    "BACKEND",
    "CalibrationResult",
    "CalibrationSpec",
    "CedEstimate",
    "ChartConfig",
    "CusumPair",
    "GridResult",
    "GridRow",
    "GridSpec",
    "NIGParams",
    "PrcState",
    "RunOutcome",
    "RunningStats",
    "ScenarioSpec",
    "SscState",
    "StepResult",
    "calibrate_h",
    "cusum_step",
    "emit_figure_data",
    "emit_table",
    "estimate_arl0",
    "estimate_ced",
    "gen_observation",
    "ic_predictive",
    "log_predictive_ratio",
    "new_state",
    "nig_update",
    "prc_step",
    "run_envelope",
    "run_grid",
    "run_once",
    "running_stats_update",
    "ssc_normalize",
    "ssc_standardize",
    "ssc_step",
    "step",
    "substream",
    "__version__",
]
