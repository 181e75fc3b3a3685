"""Backend selection for the simulation kernels.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy fallback takes over transparently. Setting SSCUSUM_PURE_PYTHON=1 in
the environment forces the fallback (used by the benchmark and the
cross-backend equivalence tests). The active backend name is exported as
BACKEND and recorded in run manifests.
"""

import os

import numpy as np

from .charts import ChartConfig, NIGParams

if os.environ.get("SSCUSUM_PURE_PYTHON"):
    from . import _pyref as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pyref as _impl

BACKEND: str = _impl.BACKEND

ssc_run = _impl.ssc_run
ssc_envelope = _impl.ssc_envelope
prc_run = _impl.prc_run
prc_envelope = _impl.prc_envelope

_SIDE_FLAGS = {"two_sided": 0, "upper": 1, "lower": -1}


def side_flag(side: str) -> int:
    return _SIDE_FLAGS[side]


def ssc_state() -> np.ndarray:
    """Fresh SSC kernel state: [n, mean, ssd, upper, lower]."""
    return np.zeros(5, dtype=np.float64)


def prc_state(prior: NIGParams) -> np.ndarray:
    """Fresh PRC kernel state: [n, mu, lam, a, b, upper, lower]."""
    return np.array(
        [0.0, prior.mu, prior.lam, prior.a, prior.b, 0.0, 0.0], dtype=np.float64
    )


def chart_state(config: ChartConfig) -> np.ndarray:
    if config.variant == "ssc":
        return ssc_state()
    return prc_state(config.prior)


def chart_runner(config: ChartConfig):
    return ssc_run if config.variant == "ssc" else prc_run


def chart_enveloper(config: ChartConfig):
    return ssc_envelope if config.variant == "ssc" else prc_envelope
