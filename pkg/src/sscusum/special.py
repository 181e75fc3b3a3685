"""Normal and Student-t distribution functions used by the chart transforms.

Only the pieces the charts need live here: the standard Normal CDF and
quantile, and the Student-t CDF for real (possibly non-integer) degrees of
freedom.  The t CDF goes through the regularized incomplete beta function so
fractional degrees of freedom are exact, and both CDFs saturate cleanly at
0/1 for arguments far in the tails instead of raising.
"""

import numpy as np
from scipy import special as _sp


def std_normal_cdf(x):
    """Standard Normal CDF. Saturates at 0/1 for extreme arguments."""
    return _sp.ndtr(x)


def std_normal_quantile(p):
    """Standard Normal quantile for p strictly inside (0, 1).

    p of exactly 0 or 1 (or anything outside) raises ValueError: it signals
    that an upstream transform collapsed an observation onto a degenerate
    probability rather than a legitimate query.
    """
    parr = np.asarray(p, dtype=float)
    if np.any(parr <= 0.0) or np.any(parr >= 1.0):
        raise ValueError("quantile requires 0 < p < 1")
    out = _sp.ndtri(parr)
    return float(out) if np.isscalar(p) else out


def student_t_cdf(x, df):
    """Student-t CDF with df > 0 degrees of freedom (non-integer allowed).

    Evaluated through the regularized incomplete beta function on the side
    of the smaller tail, then mirrored, which keeps the symmetry identity
    F(x) + F(-x) = 1 tight and preserves relative accuracy far out.
    """
    dfarr = np.asarray(df, dtype=float)
    if np.any(dfarr <= 0.0):
        raise ValueError("degrees of freedom must be positive")
    xarr = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        tail = 0.5 * _sp.betainc(dfarr / 2.0, 0.5, dfarr / (dfarr + xarr * xarr))
    out = np.where(xarr <= 0.0, tail, 1.0 - tail)
    if np.isscalar(x) and np.isscalar(df):
        return float(out)
    return out
