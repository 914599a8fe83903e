"""Exception types shared across the library."""


class ModelError(Exception):
    """Base class for domain errors raised by this package."""


class OverCapacityError(ModelError):
    """Arrival rate meets or exceeds the service rate; the queue never clears."""


class SaturationError(ModelError):
    """Queue does not dissipate within the available green interval."""


class EarlyClearanceError(ModelError):
    """Queue dissolves during the acceleration ramp, outside the closed-form regime."""


class ConvergenceError(ModelError):
    """Iterative solver failed to reach the requested residual."""


class InfeasibleError(ModelError):
    """No cycle length can satisfy the stated constraints."""


class ConfigError(ModelError):
    """Invalid or incomplete run configuration."""


class OracleMismatchError(ModelError):
    """A closed form disagreed with its independent brute-force check."""
