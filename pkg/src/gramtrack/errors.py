"""Exception types shared across the package."""


class GramtrackError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GramtrackError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ParameterError(GramtrackError, ValueError):
    """An argument is outside its documented domain."""


class DegenerateInputError(GramtrackError, ValueError):
    """Input is structurally valid but numerically unusable (e.g. zero norm)."""


class FormatError(GramtrackError, ValueError):
    """A binary feature file is malformed, truncated, or has a bad header."""


class IngestionError(GramtrackError, ValueError):
    """A dataset, frame, or feature directory could not be read."""


class ConfigError(GramtrackError, ValueError):
    """Tracker configuration values are inconsistent or unsupported."""


class NumericConsistencyError(GramtrackError, ArithmeticError):
    """A numeric result violates an analytic guarantee (e.g. a Gram matrix
    determinant far below zero), indicating a bug upstream."""


class ExperimentError(GramtrackError, RuntimeError):
    """A benchmark experiment could not complete (persistence, reload, ...)."""
