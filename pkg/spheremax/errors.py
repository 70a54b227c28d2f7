"""Exception hierarchy shared by every spheremax module."""


class SpheremaxError(Exception):
    """Root of all errors raised by spheremax."""


class DomainError(SpheremaxError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConvergenceError(SpheremaxError):
    """Adaptive refinement stopped before reaching its tolerance."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class RegionOverlapError(SpheremaxError):
    """A point was classified as both bounded and unbounded."""


class GridFormatError(SpheremaxError):
    """A serialized grid function is corrupt or inconsistent with its sidecar."""


class UnknownExperimentError(SpheremaxError, KeyError):
    """The requested experiment name is not registered."""
