"""Estimators of the in-control average run length and the conditional
expected delay from simulated run outcomes.

Both estimators report a standard error alongside the point estimate so
that downstream comparisons can use principled tolerances, and both report
censoring explicitly instead of hiding it: a censored run contributes the
cap (ARL) or cap - tau + 1 (CED) and is counted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimateError
from .simulate import ScenarioSpec, simulate_stop_times


@dataclass(frozen=True)
class ArlEstimate:
    """Mean run length with its Monte Carlo standard error."""

    mean: float
    std_error: float
    reps: int
    censored: int


@dataclass(frozen=True)
class CedEstimate:
    """Conditional expected delay with its Monte Carlo standard error.

    early_alarms counts runs that stopped before the change point (they are
    excluded from the delay average); censored counts runs that never
    alarmed within the cap (they enter the average at the largest
    observable delay and are flagged here rather than dropped).
    """

    ced: float
    std_error: float
    reps: int
    early_alarms: int
    censored: int


def _mean_se(values: np.ndarray):
    mean = float(values.mean())
    if values.size > 1:
        se = float(values.std(ddof=1) / math.sqrt(values.size))
    else:
        se = math.nan  # a single replication cannot support an error bar
    return mean, se


def arl_from_stop_times(times: np.ndarray, censored: np.ndarray) -> ArlEstimate:
    if bool(censored.all()):
        raise EstimateError("every run was censored at the cap; ARL not estimable")
    mean, se = _mean_se(times.astype(np.float64))
    return ArlEstimate(mean, se, int(times.size), int(censored.sum()))


def estimate_arl0(spec: ScenarioSpec, h: float = None) -> ArlEstimate:
    """In-control average run length of the chart at decision limit h."""
    if not spec.in_control:
        raise ValueError("ARL0 requires an in-control scenario (delta=0 or tau=inf)")
    times, censored = simulate_stop_times(spec, h)
    return arl_from_stop_times(times, censored)


def ced_from_stop_times(times: np.ndarray, censored: np.ndarray, tau: float) -> CedEstimate:
    qualifying = times >= tau
    early = int(times.size - qualifying.sum())
    if not qualifying.any():
        raise EstimateError("no run survived to the change point; CED not estimable")
    delays = times[qualifying].astype(np.float64) - tau + 1.0
    ced, se = _mean_se(delays)
    return CedEstimate(ced, se, int(times.size), early, int(censored.sum()))


def estimate_ced(spec: ScenarioSpec, h: float = None) -> CedEstimate:
    """Conditional expected delay: mean of (T - tau + 1) over runs with
    T >= tau. Runs alarming before tau contribute nothing and are excluded
    from the denominator, matching the ratio form of the definition."""
    if math.isinf(spec.tau):
        raise ValueError("CED requires a finite change point tau")
    times, censored = simulate_stop_times(spec, h)
    return ced_from_stop_times(times, censored, spec.tau)
