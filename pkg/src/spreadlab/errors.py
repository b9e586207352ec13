"""Exception types shared across the package."""


class SpreadlabError(Exception):
    """Base class for all spreadlab errors."""


class ValidationError(SpreadlabError):
    """Bad user input: parameters, flags, malformed values."""


class DimensionError(ValidationError):
    """Coordinate dimensionality mismatch."""


class ParameterError(ValidationError):
    """Model parameter outside its admissible range."""


class ConfigurationError(SpreadlabError):
    """Inconsistent configuration, e.g. missing weights in weight mode."""


class StateError(SpreadlabError):
    """Operation called outside the phase/state where it is defined."""


class EstimationError(SpreadlabError):
    """Estimator cannot produce a result from the given data."""


class AlignmentError(SpreadlabError):
    """Mismatched sampling grids between curves that must be combined."""


class DataError(SpreadlabError):
    """Unreadable or structurally broken input file (exit code 2 in the CLI)."""
