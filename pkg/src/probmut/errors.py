"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, ToleranceError -> 4.
"""


class ProbmutError(Exception):
    """Base class for all package errors."""


class ConfigError(ProbmutError):
    """Invalid configuration or usage (bad sizes, thresholds, missing seed)."""


class DataError(ProbmutError):
    """Malformed or inconsistent input data (pool files, densities, reports)."""


class ToleranceError(ProbmutError):
    """A numerical routine could not reach its requested tolerance.

    Carries the best estimate obtained so far and the tolerance that was
    actually achieved.
    """

    def __init__(self, message: str, estimate: float, achieved: float):
        super().__init__(f"{message} (best estimate {estimate!r}, achieved tolerance {achieved:.3e})")
        self.estimate = estimate
        self.achieved = achieved
