"""Exception types raised across the package."""


class UniLDPCError(Exception):
    """Base class for all package errors."""


class ParameterError(UniLDPCError, ValueError):
    """A channel or algorithm parameter is outside its valid range."""


class GridError(UniLDPCError, ValueError):
    """Densities live on different grids, or a point is not on the expected grid."""


class SymmetryError(UniLDPCError, ValueError):
    """A density fails the symmetry condition a(-x) = exp(-x) a(x)."""


class CapacityError(UniLDPCError, ValueError):
    """Capacity of a channel does not match the capacity it is used with."""


class DegenerateCapacityError(ParameterError):
    """Capacity 0 or 1 admits no nontrivial basis."""


class DesignInfeasibleError(UniLDPCError):
    """No degree distribution satisfying the design constraints was found."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ThresholdNotFoundError(UniLDPCError):
    """The code does not converge even at capacities arbitrarily close to 1."""


class MisuseError(UniLDPCError):
    """A documented precondition of an operation was violated by the caller."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail
