class ShrinkPriorError(Exception):
    """Base class for every error raised by shrinkprior."""


class ValidationError(ShrinkPriorError, ValueError):
    """Malformed configuration, JSON document, grid or command line input."""


class DomainError(ShrinkPriorError, ValueError):
    """An argument lies outside the domain of the operation."""


class IntegrabilityError(ShrinkPriorError, ArithmeticError):
    """The requested integral over (0, 1) does not converge."""


class RelaxedSpecError(DomainError):
    """A relaxed-mode prior (b >= 1 or a >= 1) was passed to a minimaxity check."""


class CorollaryInapplicableError(DomainError):
    """The monotonicity hypothesis of a corollary does not hold for this prior."""
