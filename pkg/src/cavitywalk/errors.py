"""Exception hierarchy shared by all modules."""


class CavityWalkError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CavityWalkError, ValueError):
    """Invalid input parameters."""


class LatticeOverflowError(CavityWalkError):
    """Amplitude would be translated past the edge of an open lattice window."""


class UndefinedInvariantError(CavityWalkError):
    """A winding number was requested at a gapless point."""


class UnsupportedConfigurationError(CavityWalkError):
    """The requested operation does not apply to this configuration."""


class NumericError(CavityWalkError):
    """A numerical routine failed to converge or produced non-finite output."""
