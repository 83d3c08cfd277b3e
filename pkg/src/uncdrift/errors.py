"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not chain as required."""


class InputError(ValueError):
    """A caller-supplied value is outside its valid domain."""


class ConfigurationError(ValueError):
    """An estimator, detector or experiment was configured inconsistently."""


class StateError(RuntimeError):
    """An object was queried before it accumulated enough state."""
