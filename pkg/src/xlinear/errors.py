"""Exception types shared across the package."""


class XLinearError(Exception):
    """Base class for all package errors."""


class ShapeError(XLinearError, ValueError):
    """Operands have incompatible shapes."""


class NonFiniteError(XLinearError, FloatingPointError):
    """A NaN or Inf reached an op, a parameter, or a gradient."""


class SpectrumError(XLinearError, ValueError):
    """A spectrum violates its bin count or conjugate-symmetry constraints."""


class ConfigError(XLinearError, ValueError):
    """A model, training, or run configuration is invalid."""


class DataError(XLinearError, ValueError):
    """Input data could not be parsed or is too small for the request."""
