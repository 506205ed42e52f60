"""Exception types shared across the package."""


class ExactRegError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(ExactRegError):
    """A dimension argument is outside the supported range."""


class InvalidInputError(ExactRegError):
    """Malformed or out-of-contract input data."""


class NotInscribedError(ExactRegError):
    """Input points do not lie on a common centered sphere."""


class DegenerateVertexError(ExactRegError):
    """Operation requires a nondegenerate vertex (square invertible active set)."""


class UnboundedProblemError(ExactRegError):
    """The LP has an unbounded descent direction."""


class InfeasibleProblemError(ExactRegError):
    """The LP constraint set is empty."""


class NumericalFailureError(ExactRegError):
    """An iterative numerical routine failed to converge."""


class TieError(ExactRegError):
    """A measure-zero tie was hit; the caller should resample."""


class PreconditionError(ExactRegError):
    """A documented precondition of an operation was violated."""


class ContractError(ExactRegError):
    """A bound was requested without the certificate it needs."""


class ConfigError(ExactRegError):
    """Invalid experiment configuration file."""
