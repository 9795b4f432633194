"""Shared error types with CLI exit-code mapping."""


class ConfigError(ValueError):
    """Invalid configuration or mismatched inputs (exit code 2)."""


class InsufficientDataError(RuntimeError):
    """Too few samples, batches or attempts for the statistic (exit code 3)."""


class BinningError(InsufficientDataError):
    """Histogram binning left too many empty bins."""


class BracketError(RuntimeError):
    """A scan's minimum landed on the grid edge; widen the bracket."""
