"""Chart cores: per-observation state updates, CUSUM accumulation and alarms.

Two self-starting schemes share the same outer loop. The frequentist chart
(SSC) standardizes each new observation against the running mean and sample
standard deviation of everything seen before it, maps that through a
Student-t-to-Normal transform so the increments are exactly standard Normal
in control, and feeds them to a classic two-sided CUSUM with reference value
k. The Bayesian chart (PRC) keeps a Normal-Inverse-Gamma posterior over the
unknown mean and variance and scores each observation by the log ratio of a
location-shifted posterior predictive to the in-control posterior
predictive; the shift is k times the current posterior scale estimate, so k
plays the role of the targeted shift size.

Every step scores the incoming observation against state built strictly
from earlier data, then absorbs it. Both charts force their statistics to
zero while there is not yet enough history to score at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

from . import special
from .errors import (
    DegenerateHistoryError,
    InsufficientHistoryError,
    NotYetProperError,
)

SIDES = ("upper", "lower", "two_sided")

# Smallest positive double; quantile inputs are floored here so that an
# observation beyond the representable tail saturates instead of raising.
_TAIL_FLOOR = 5e-324


@dataclass(frozen=True)
class RunningStats:
    """Count, mean and sum of squared deviations of the observations so far."""

    n: int = 0
    mean: float = 0.0
    ssd: float = 0.0

    def sd(self) -> float:
        """Sample standard deviation (n-1 divisor) of the history."""
        if self.n < 2:
            raise InsufficientHistoryError("need at least 2 observations for a scale")
        return math.sqrt(self.ssd / (self.n - 1))


def running_stats_update(stats: RunningStats, x: float) -> RunningStats:
    """Absorb one observation, updating mean and ssd in one numerically stable pass."""
    n = stats.n + 1
    delta = x - stats.mean
    mean = stats.mean + delta / n
    ssd = stats.ssd + delta * (x - mean)
    return RunningStats(n, mean, ssd)


@dataclass(frozen=True)
class NIGParams:
    """Normal-Inverse-Gamma hyperparameters (prior or sequentially updated posterior)."""

    mu: float
    lam: float
    a: float
    b: float

    @classmethod
    def reference(cls) -> "NIGParams":
        """The non-informative reference prior, proportional to 1/variance."""
        return cls(0.0, 0.0, -0.5, 0.0)

    @property
    def is_proper(self) -> bool:
        """True once the posterior predictive exists."""
        return self.lam > 0.0 and self.a > 0.0 and self.b > 0.0


def nig_update(params: NIGParams, x: float) -> NIGParams:
    """Conjugate update of the NIG parameters with a single observation.

    Applying this sequentially over x_1..x_n reproduces the closed-form
    batch posterior exactly (up to rounding), since the posterior after
    each observation is the prior for the next.
    """
    lam = params.lam
    b = params.b + lam * (x - params.mu) ** 2 / (2.0 * (lam + 1.0))
    mu = (lam * params.mu + x) / (lam + 1.0)
    return NIGParams(mu, lam + 1.0, params.a + 0.5, b)


class TPredictive(NamedTuple):
    """Student-t posterior predictive: degrees of freedom, location, scale."""

    df: float
    loc: float
    scale: float


def ic_predictive(params: NIGParams) -> TPredictive:
    """In-control posterior predictive of the next observation."""
    if not params.is_proper:
        raise NotYetProperError("posterior is improper; keep absorbing observations")
    scale2 = (params.lam + 1.0) * params.b / (params.lam * params.a)
    return TPredictive(2.0 * params.a, params.mu, math.sqrt(scale2))


def _log_t_pdf(x: float, df: float, loc: float, scale: float) -> float:
    z = (x - loc) / scale
    return (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
        - math.log(scale)
        - (df + 1.0) / 2.0 * math.log1p(z * z / df)
    )


def log_predictive_ratio(params: NIGParams, x: float, k_prc: float) -> float:
    """Log ratio of the shifted (out-of-control) predictive to the in-control one.

    The out-of-control predictive is the in-control Student-t moved by
    k_prc times the posterior scale estimate sqrt(b/a); both densities are
    evaluated directly and subtracted in log space.
    """
    pred = ic_predictive(params)
    shift = k_prc * math.sqrt(params.b / params.a)
    return _log_t_pdf(x, pred.df, pred.loc + shift, pred.scale) - _log_t_pdf(
        x, pred.df, pred.loc, pred.scale
    )


@dataclass(frozen=True)
class CusumPair:
    """The two one-sided CUSUM accumulators; upper >= 0, lower <= 0 always."""

    upper: float = 0.0
    lower: float = 0.0

    @property
    def two_sided(self) -> float:
        return max(self.upper, -self.lower)


def cusum_step(pair: CusumPair, increment: float, k: float = 0.0) -> CusumPair:
    """One CUSUM update with a common increment and reference value k.

    The SSC feeds its Normal-transformed increment to both sides with its
    reference value; the PRC passes k = 0 because its reference value is
    already inside the log predictive ratio, and drives the two sides with
    separate ratios (see prc_step).
    """
    return CusumPair(
        max(0.0, pair.upper + increment - k),
        min(0.0, pair.lower + increment + k),
    )


@dataclass(frozen=True)
class ChartConfig:
    """Which chart to run and with what design parameters.

    h may be None while a configuration is still awaiting calibration; any
    finite h >= 0 (or +inf as an unreachable sentinel) is accepted when
    stepping.
    """

    variant: str  # "ssc" | "prc"
    k: float
    h: Optional[float] = None
    prior: Optional[NIGParams] = None  # PRC only
    side: str = "two_sided"

    def __post_init__(self):
        if self.variant not in ("ssc", "prc"):
            raise ValueError(f"unknown chart variant {self.variant!r}")
        if not (self.k > 0.0):
            raise ValueError("reference value k must be positive")
        if self.h is not None and not (self.h >= 0.0):
            raise ValueError("decision limit h must be >= 0 (or None)")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        if self.variant == "prc" and self.prior is None:
            object.__setattr__(self, "prior", NIGParams.reference())
        if self.prior is not None and (self.prior.lam < 0.0 or self.prior.b < 0.0):
            raise ValueError("prior requires lambda >= 0 and b >= 0")


@dataclass(frozen=True)
class StepResult:
    """Outcome of scoring one observation."""

    statistic: float
    increment: float
    alarm: bool
    warmup: bool


@dataclass(frozen=True)
class SscState:
    stats: RunningStats = RunningStats()
    cusum: CusumPair = CusumPair()


@dataclass(frozen=True)
class PrcState:
    params: NIGParams
    cusum: CusumPair = CusumPair()
    n_seen: int = 0


ChartState = Union[SscState, PrcState]


def new_state(config: ChartConfig) -> ChartState:
    """Fresh chart state for a configuration."""
    if config.variant == "ssc":
        return SscState()
    return PrcState(config.prior)


def ssc_standardize(stats: RunningStats, x: float) -> float:
    """Standardize x against the running history: (x - mean) / sample sd."""
    if stats.n < 2:
        raise InsufficientHistoryError("standardization needs 2 prior observations")
    if stats.ssd <= 0.0:
        raise DegenerateHistoryError("all prior observations identical; no scale")
    return (x - stats.mean) / stats.sd()


def ssc_normalize(t: float, n: int) -> float:
    """Map the standardized value to an exact standard Normal deviate.

    With n prior observations, sqrt(n/(n+1)) * t follows a Student-t with
    n - 1 degrees of freedom in control, so chaining its CDF with the
    Normal quantile yields an exactly N(0,1) increment. The CDF is
    evaluated on the side of the smaller tail so the result stays finite
    and accurate arbitrarily far out.
    """
    if n < 2:
        raise InsufficientHistoryError("normalization needs 2 prior observations")
    arg = math.sqrt(n / (n + 1.0)) * t
    tail = special.student_t_cdf(-abs(arg), n - 1)
    u = special.std_normal_quantile(max(tail, _TAIL_FLOOR))
    return -u if arg > 0.0 else u


def _decide(pair: CusumPair, config: ChartConfig) -> Tuple[float, bool]:
    h = config.h
    if h is None:
        raise ValueError("chart has no decision limit; set h before stepping")
    if config.side == "upper":
        return pair.upper, pair.upper > h
    if config.side == "lower":
        return pair.lower, pair.lower < -h
    return pair.two_sided, pair.two_sided > h


def ssc_step(state: SscState, x: float, config: ChartConfig) -> Tuple[SscState, StepResult]:
    """Score one observation with the SSC, then absorb it into the history."""
    stats = state.stats
    if stats.n < 2:
        return (
            SscState(running_stats_update(stats, x), state.cusum),
            StepResult(0.0, 0.0, False, True),
        )
    u = ssc_normalize(ssc_standardize(stats, x), stats.n)
    pair = cusum_step(state.cusum, u, config.k)
    statistic, alarm = _decide(pair, config)
    return (
        SscState(running_stats_update(stats, x), pair),
        StepResult(statistic, u, alarm, False),
    )


def prc_step(state: PrcState, x: float, config: ChartConfig) -> Tuple[PrcState, StepResult]:
    """Score one observation with the PRC, then absorb it into the posterior.

    The first observation is always absorbed unscored; scoring then starts
    as soon as the posterior is proper (immediately for a proper prior,
    after two distinct observations under the reference prior). The upper
    accumulator collects the log ratio for an upward shift (+k), the lower
    one the mirrored ratio for a downward shift (-k).
    """
    params = state.params
    if state.n_seen < 1 or not params.is_proper:
        return (
            PrcState(nig_update(params, x), state.cusum, state.n_seen + 1),
            StepResult(0.0, 0.0, False, True),
        )
    inc_up = log_predictive_ratio(params, x, config.k)
    inc_dn = log_predictive_ratio(params, x, -config.k)
    pair = CusumPair(
        max(0.0, state.cusum.upper + inc_up),
        min(0.0, state.cusum.lower - inc_dn),
    )
    statistic, alarm = _decide(pair, config)
    increment = inc_dn if config.side == "lower" else inc_up
    return (
        PrcState(nig_update(params, x), pair, state.n_seen + 1),
        StepResult(statistic, increment, alarm, False),
    )


def step(state: ChartState, x: float, config: ChartConfig):
    """Dispatch to the configured chart's step function."""
    if config.variant == "ssc":
        return ssc_step(state, x, config)
    return prc_step(state, x, config)
