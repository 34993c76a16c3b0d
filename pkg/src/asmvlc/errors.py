"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric argument lies outside its admissible range."""


class SingularGeometryError(ValueError):
    """LED and photodiode coincide, so the link distance is zero."""


class NotApplicableError(ValueError):
    """The quantity is undefined for this configuration (e.g. one LED)."""


class InfeasibleConstraintError(ValueError):
    """No modulation-order combination meets the spectral-efficiency target."""


class ConfigError(ValueError):
    """A scenario or sweep description could not be parsed."""
