"""Exception types shared across the lab."""


class ItolabError(Exception):
    """Base class for all lab-specific errors."""


class ModelEvaluationError(ItolabError):
    """A coefficient returned a non-finite value; message identifies (t, x)."""


class PathBlowUpError(ItolabError):
    """The Euler scheme produced a non-finite state; message carries the step index."""


class GridMismatchError(ItolabError, ValueError):
    """Two objects that must share a time grid do not."""


class ClockRangeError(ItolabError, ValueError):
    """A time-change query fell outside the clock's range."""


class UnsupportedOperationError(ItolabError):
    """The operation is not defined for the given inputs (e.g. non-C12 transform)."""


class ConfigError(ItolabError, ValueError):
    """A scenario config failed to parse or validate.

    ``field`` names the offending key so callers can emit machine-readable
    error records.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
