"""Exception types shared across the package."""


class VcsEffortError(Exception):
    """Base class for all errors raised by this package."""


class IngestionError(VcsEffortError):
    """Input data could not be read or parsed."""


class ConfigError(VcsEffortError):
    """Invalid configuration: bad flag values, patterns, or alias directives."""


class CalibrationError(VcsEffortError):
    """Threshold calibration cannot proceed, e.g. no usable labels."""


class ParameterError(VcsEffortError):
    """A computation was invoked with an out-of-range parameter."""


class GenerationError(VcsEffortError):
    """A synthetic population specification cannot be satisfied."""
