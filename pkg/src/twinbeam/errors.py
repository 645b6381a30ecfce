"""Exception types shared across the package."""


class TwinbeamError(Exception):
    """Base class for all package errors."""


class ResolutionError(TwinbeamError):
    """A grid is too coarse (or too short) to resolve the requested object."""


class TruncationError(TwinbeamError):
    """Significant mass fell outside a truncated grid or basis."""


class ConfigError(TwinbeamError):
    """Invalid run configuration.  Carries one message per offending key."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConsistencyError(TwinbeamError):
    """An internal self-check (e.g. symplectic residual) failed."""


class NumericalError(TwinbeamError):
    """The adaptive integrator could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)
