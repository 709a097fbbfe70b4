"""Exception types shared across the package."""


class FreqRecError(Exception):
    """Base class for all package errors."""


class ShapeError(FreqRecError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ConfigError(FreqRecError, ValueError):
    """A configuration value is out of range or inconsistent."""


class GraphError(FreqRecError, RuntimeError):
    """Misuse of the recorded computation graph (e.g. double backward)."""


class SpectrumError(FreqRecError, ValueError):
    """A complex spectrum violates the constraints required of it."""


class DataFormatError(FreqRecError, ValueError):
    """An interaction file could not be parsed."""
