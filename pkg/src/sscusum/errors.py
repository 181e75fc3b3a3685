"""Exception types shared across the chart, simulation and calibration layers."""


class ChartError(Exception):
    """Base class for per-observation chart failures."""


class InsufficientHistoryError(ChartError):
    """Raised when a statistic is requested before enough data has accrued."""


class DegenerateHistoryError(ChartError):
    """Raised when every prior observation is identical, so no scale exists."""


class NotYetProperError(ChartError):
    """Raised when the posterior is still improper and has no predictive."""


class EstimateError(Exception):
    """Raised when simulated run outcomes cannot support the requested estimate."""


class BracketError(Exception):
    """Raised when no decision-limit bracket containing the target can be found."""
