"""Exception types raised across the package."""


class HomsimError(Exception):
    """Base class for all simulator errors."""


class ValidationError(HomsimError, ValueError):
    """A state, matrix or distribution failed its structural checks."""


class CompositionError(HomsimError, ValueError):
    """Two spaces cannot be combined (overlapping subsystem names)."""


class DimensionError(HomsimError, ValueError):
    """Operands live on different spaces."""


class SubsystemLookupError(HomsimError, LookupError):
    """A subsystem or mode name is not part of the space."""


class ParameterError(HomsimError, ValueError):
    """A numeric parameter is outside its domain."""


class TruncationError(HomsimError, ValueError):
    """A Fock term exceeds the photon-number cutoff."""
