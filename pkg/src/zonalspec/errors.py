"""Exception and warning types shared across the package."""

from __future__ import annotations


class PatternFormatError(ValueError):
    """Raised when a pattern CSV file cannot be parsed."""


class OutOfWindowError(ValueError):
    """Raised when coordinates fall outside the window they were declared in."""


class ConfigError(ValueError):
    """Raised for invalid configuration values (CLI flags, config JSON)."""


class BudgetExceededError(RuntimeError):
    """Raised when a simulation would generate more points than the budget allows."""


class DegenerateInputError(ValueError):
    """Raised when an input is too small or too degenerate to analyze."""


class ZeroPeriodogramError(DegenerateInputError):
    """Raised when a smoothed periodogram value is exactly zero.

    A zero cell means no point fell inside any filter box around the
    location, so the log table cannot be formed.  The offending cell is
    recorded so callers can report which location/frequency pair failed.
    """

    def __init__(self, location_index, frequency_index, location, frequency):
        self.location_index = int(location_index)
        self.frequency_index = int(frequency_index)
        self.location = tuple(float(v) for v in location)
        self.frequency = tuple(float(v) for v in frequency)
        super().__init__(
            "smoothed periodogram is exactly zero at location index "
            f"{self.location_index} (z = {self.location}), frequency index "
            f"{self.frequency_index} (omega = {self.frequency}); "
            "the pattern is too sparse near this location for the current "
            "filter half-width h and smoothing side rho - enlarge them or "
            "supply a denser pattern"
        )


class DesignSpacingWarning(UserWarning):
    """Warning issued when test locations or frequencies are spaced too closely."""
