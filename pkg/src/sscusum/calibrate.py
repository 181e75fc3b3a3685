"""Decision-limit calibration: regula falsi on a cached Monte Carlo ARL curve.

One simulation pass per calibration: every replication's full-horizon
running-maximum envelope is recorded once, after which the stop time for
ANY candidate decision limit is a binary search per replication. All h
evaluations therefore share the same random numbers exactly, which makes
the estimated ARL a deterministic monotone step function of h, so a root
can be located to within the step granularity and the whole procedure is
reproducible bit for bit.

Because the ARL estimate is a step function, plain regula falsi can
stagnate on one endpoint; the Illinois weighting is applied to keep the
bracket shrinking, and convergence is declared on |ARL - target| <= tol
rather than on bracket width.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .charts import ChartConfig
from .errors import BracketError
from .metrics import ArlEstimate
from .simulate import ScenarioSpec, run_envelope

# Hard ceiling for automatic bracket expansion.
_H_LIMIT = 200.0


@dataclass(frozen=True)
class CalibrationSpec:
    """What to calibrate: chart (its h is ignored), target ARL0, and the
    Monte Carlo / root-finding budget."""

    chart: ChartConfig
    target_arl: float = 370.0
    reps: int = 10000
    master_seed: int = 0
    bracket: Tuple[float, float] = (0.1, 20.0)
    tol_arl: float = 2.0
    max_iters: int = 60
    cap: int = 10000

    def __post_init__(self):
        if not (self.target_arl > 1.0):
            raise ValueError("target ARL must exceed 1")
        if self.target_arl >= self.cap:
            raise ValueError("target ARL must be below the censoring cap")
        if not (self.tol_arl > 0.0):
            raise ValueError("tol_arl must be positive")
        lo, hi = self.bracket
        if not (0.0 < lo < hi):
            raise ValueError("bracket must satisfy 0 < h_lo < h_hi")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


@dataclass(frozen=True)
class CalibrationResult:
    h: float
    achieved_arl: ArlEstimate
    iterations: int
    converged: bool


class ArlCurve:
    """In-control ARL as a queryable function of the decision limit.

    Built from one envelope pass over `reps` replications; arl(h) is exact
    for the fixed replication set (common random numbers), monotone
    non-decreasing in h, and censors at the cap.
    """

    def __init__(self, spec: CalibrationSpec):
        scenario = ScenarioSpec(
            chart=spec.chart,
            delta=0.0,
            tau=math.inf,
            reps=spec.reps,
            master_seed=spec.master_seed,
            cap=spec.cap,
        )
        self.cap = spec.cap
        self.reps = spec.reps
        self._envelopes = [run_envelope(scenario, r) for r in range(spec.reps)]

    def stop_times(self, h: float):
        times = np.empty(self.reps, dtype=np.int64)
        censored = np.zeros(self.reps, dtype=bool)
        for r, (t, v) in enumerate(self._envelopes):
            idx = int(np.searchsorted(v, h, side="right"))
            if idx < len(t):
                times[r] = t[idx]
            else:
                times[r] = self.cap
                censored[r] = True
        return times, censored

    def arl(self, h: float) -> ArlEstimate:
        times, censored = self.stop_times(h)
        mean, se = float(times.mean()), float(
            times.std(ddof=1) / math.sqrt(self.reps) if self.reps > 1 else math.nan
        )
        return ArlEstimate(mean, se, self.reps, int(censored.sum()))


def calibrate_h(spec: CalibrationSpec, curve: ArlCurve = None) -> CalibrationResult:
    """Find h with estimated ARL0 within tol of the target.

    A prebuilt ArlCurve may be passed to reuse an existing simulation pass
    (it must have been built from an identical spec)."""
    if curve is None:
        curve = ArlCurve(spec)
    target = spec.target_arl

    def g(h):
        return curve.arl(h).mean - target

    h_lo, h_hi = spec.bracket
    g_lo = g(h_lo)
    # The lower edge must sit below the target: shrink toward 0 if not.
    attempts = 0
    while g_lo > 0.0 and attempts < 8:
        h_lo /= 4.0
        g_lo = g(h_lo)
        attempts += 1
    if g_lo > 0.0:
        raise BracketError(
            f"ARL at h={h_lo:.3g} is already {g_lo + target:.3g} > target {target:.6g}"
        )
    if abs(g_lo) <= spec.tol_arl:
        return CalibrationResult(h_lo, curve.arl(h_lo), 0, True)
    g_hi = g(h_hi)
    # All-censored runs keep the mean at the cap, which still exceeds the
    # target (validated), so expanding h_hi always brackets eventually.
    while g_hi < 0.0 and h_hi < _H_LIMIT:
        h_hi = min(h_hi * 2.0, _H_LIMIT)
        g_hi = g(h_hi)
    if g_hi < 0.0:
        raise BracketError(
            f"ARL at h={h_hi:.3g} is only {g_hi + target:.6g}; target {target:.6g} unreachable"
        )
    if abs(g_hi) <= spec.tol_arl:
        return CalibrationResult(h_hi, curve.arl(h_hi), 0, True)

    best_h, best_g = (h_lo, g_lo) if abs(g_lo) < abs(g_hi) else (h_hi, g_hi)
    iterations = 0
    for iterations in range(1, spec.max_iters + 1):
        h_new = (h_lo * g_hi - h_hi * g_lo) / (g_hi - g_lo)
        if not (h_lo < h_new < h_hi):  # numerical degeneracy: fall back to bisection
            h_new = 0.5 * (h_lo + h_hi)
        g_new = g(h_new)
        if abs(g_new) < abs(best_g) or (abs(g_new) == abs(best_g) and h_new < best_h):
            best_h, best_g = h_new, g_new
        if abs(g_new) <= spec.tol_arl:
            return CalibrationResult(h_new, curve.arl(h_new), iterations, True)
        if g_new < 0.0:
            h_lo, g_lo = h_new, g_new
            g_hi *= 0.5  # Illinois damping against endpoint stagnation
        else:
            h_hi, g_hi = h_new, g_new
            g_lo *= 0.5
    return CalibrationResult(best_h, curve.arl(best_h), iterations, False)
