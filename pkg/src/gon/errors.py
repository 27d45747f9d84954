"""Exception hierarchy shared by every module."""


class GonError(Exception):
    """Base class for all toolkit errors."""


class InvalidLattice(GonError):
    """Basis is singular, ragged, or otherwise not a full-rank lattice."""


class UnsupportedExactOp(GonError):
    """An exact-only operation was requested on an inexact lattice."""


class EnumerationBudget(GonError):
    """Lattice-point enumeration exceeded its configured point cap."""


class UnboundedBody(GonError):
    """The body {F <= 1} is unbounded."""


class NotConvex(GonError):
    """A convex-only operation was requested on a star-body gauge."""


class DimensionMismatch(GonError, ValueError):
    pass


class SearchSpaceTooLarge(GonError):
    pass


class InvalidRho(GonError, ValueError):
    pass


class ConfigError(GonError, ValueError):
    """Experiment configuration is malformed."""


class InvariantViolation(GonError, AssertionError):
    """A checked inequality or identity failed."""
