class T2UError(Exception):
    """
    Root of every error raised by the simulator.

    Entry points catch this type, log it and translate it into an exit code or an
    error payload.
    """


class ConfigError(T2UError, ValueError):
    """Invalid scenario, trajectory or CLI input."""


class TrajectoryFormatError(ConfigError):
    """Malformed trajectory file: bad row, non-monotone time or no samples."""


class GeometryError(T2UError, ValueError):
    """A position collapsed onto the array origin or a range is non-positive."""


class DimensionMismatchError(T2UError, ValueError):
    pass


class SingularCovarianceError(T2UError, ArithmeticError):
    """Residual covariance is not positive definite."""


class UnreachableModelError(T2UError, ArithmeticError):
    """No source model transitions into a target model (zero mixing denominator)."""


class DivergenceError(T2UError, ArithmeticError):
    """Every model-probability numerator is zero."""


class NoUsableMeasurementError(T2UError):
    """Association received no measurement, or only zero-likelihood ones."""
