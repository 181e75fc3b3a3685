"""Deterministic Monte Carlo engine for chart run lengths.

Every replication owns an independent, counter-based random substream keyed
by (master_seed, replication_index), so results are a pure function of the
scenario and seed: execution order, chunking and degree of parallelism
cannot change an outcome. Normal variates come from the inverse CDF applied
to the substream's uniforms, which keeps common-random-number comparisons
across decision limits and across chart variants meaningful.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import kernels
from .charts import ChartConfig

# Floor on the uniforms: Generator.random() can return exactly 0.0, whose
# inverse-CDF image is -inf and would poison the chart state.
_U_FLOOR = 2.0**-55

# Block sizes for incremental generation: grow geometrically so short runs
# stay cheap and long runs amortize per-call overhead.
_BLOCK0 = 128
_BLOCK_MAX = 8192


def substream(master_seed: int, replication_index: int) -> np.random.Generator:
    """Independent reproducible stream for one replication.

    Distinct indices give statistically independent Philox streams, and the
    mapping is pure: the same (seed, index) always yields the same stream.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(int(replication_index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte Carlo cell: a configured chart plus a change-point scenario.

    tau is the first out-of-control index (1-based); math.inf encodes a
    pure in-control stream. delta is the mean shift from tau onward, in
    in-control standard deviations.
    """

    chart: ChartConfig
    delta: float = 0.0
    tau: float = math.inf
    reps: int = 10000
    master_seed: int = 0
    cap: int = 10000

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if not math.isinf(self.tau):
            if self.tau < 1 or int(self.tau) != self.tau:
                raise ValueError("tau must be a positive integer or math.inf")
            if self.cap < self.tau:
                raise ValueError("cap must be >= tau")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")

    @property
    def in_control(self) -> bool:
        return math.isinf(self.tau) or self.delta == 0.0


@dataclass(frozen=True)
class RunOutcome:
    """Stopping time of one replication; stop_time equals the cap when censored."""

    stop_time: int
    censored: bool


def gen_observation(stream: np.random.Generator, index: int, spec: ScenarioSpec) -> float:
    """Draw the index-th observation (1-based) of a scenario stream."""
    if index < 1:
        raise ValueError("observation indices are 1-based")
    u = max(stream.random(), _U_FLOOR)
    x = float(_sp.ndtri(u))
    if index >= spec.tau:
        x += spec.delta
    return x


def _gen_block(stream, start_index, count, spec):
    """Vectorized equivalent of `count` successive gen_observation calls."""
    u = np.maximum(stream.random(count), _U_FLOOR)
    z = _sp.ndtri(u)
    if spec.tau <= start_index + count - 1:
        first_ooc = max(int(spec.tau), start_index)
        z[first_ooc - start_index :] += spec.delta
    return z


def run_once(spec: ScenarioSpec, replication_index: int, h: float = None) -> RunOutcome:
    """Feed one replication through the chart until the first alarm or the cap."""
    cfg = spec.chart
    hh = cfg.h if h is None else h
    if hh is None:
        raise ValueError("no decision limit: set chart.h or pass h explicitly")
    side = kernels.side_flag(cfg.side)
    runner = kernels.chart_runner(cfg)
    state = kernels.chart_state(cfg)
    stream = substream(spec.master_seed, replication_index)
    pos = 0
    block = _BLOCK0
    while pos < spec.cap:
        count = min(block, spec.cap - pos)
        z = _gen_block(stream, pos + 1, count, spec)
        hit = runner(z, cfg.k, hh, side, state)
        if hit:
            return RunOutcome(pos + int(hit), False)
        pos += count
        block = min(block * 2, _BLOCK_MAX)
    return RunOutcome(spec.cap, True)


def run_envelope(spec: ScenarioSpec, replication_index: int):
    """Full-horizon running-max records of the chart statistic for one
    replication: (times, values), both strictly increasing. The stop time
    for any decision limit h is the first recorded time whose value
    exceeds h."""
    cfg = spec.chart
    enveloper = kernels.chart_enveloper(cfg)
    state = kernels.chart_state(cfg)
    stream = substream(spec.master_seed, replication_index)
    z = _gen_block(stream, 1, spec.cap, spec)
    return enveloper(z, cfg.k, kernels.side_flag(cfg.side), state)


def simulate_stop_times(spec: ScenarioSpec, h: float = None):
    """Stop times and censoring flags for every replication of a scenario,
    in replication order (a fixed reduction order keeps aggregation
    deterministic)."""
    times = np.empty(spec.reps, dtype=np.int64)
    censored = np.empty(spec.reps, dtype=bool)
    for r in range(spec.reps):
        out = run_once(spec, r, h)
        times[r] = out.stop_time
        censored[r] = out.censored
    return times, censored
