"""Exception hierarchy shared by every module of the package."""


class NonlocalVrpError(Exception):
    """Base class for all package errors."""


class InvalidParams(NonlocalVrpError, ValueError):
    """Game or correlation parameters fall outside their feasible region."""


class NotAProbabilityTable(NonlocalVrpError, ValueError):
    """Negative entries, entries above one, or rows that do not sum to one."""


class SignalingInput(NonlocalVrpError, ValueError):
    """A conditional table violates the no-signaling equalities."""


class NotLocal(NonlocalVrpError):
    """No mixture of deterministic strategies reproduces the behavior."""


class DomainError(NonlocalVrpError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DimensionMismatch(NonlocalVrpError, ValueError):
    pass


class CapExceeded(NonlocalVrpError):
    """Exhaustive enumeration would exceed the configured size cap."""


class EmptyRegion(NonlocalVrpError):
    """A parameter scan contains no valid game."""


class SolverError(NonlocalVrpError, RuntimeError):
    """A numerical solver failed or produced an inconsistent answer."""
