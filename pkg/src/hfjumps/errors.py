"""Exception types shared across the toolkit."""


class HfJumpsError(Exception):
    """Base class for all toolkit errors."""


class DayRejected(HfJumpsError):
    """A symbol-day cannot be tested; the caller should skip it, not abort.

    ``reason`` is a short machine-readable tag (e.g. ``"frequency"``,
    ``"lm_short"``, ``"ajl_flat"``) recorded in the day verdict.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class ConfigError(HfJumpsError):
    """Invalid run configuration (bad key, bad value, bad weight pair)."""


class NoVariationError(HfJumpsError):
    """A regressor has no within-group variation; the slope is unidentified."""
