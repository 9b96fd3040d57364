"""Exception types shared across the package."""


class RobustMatchError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleError(RobustMatchError):
    """The instance admits no feasible solution (or violates a feasibility precondition)."""


class InvalidInstanceError(RobustMatchError, ValueError):
    """The input does not satisfy the structural preconditions of an operation."""


class InstanceTooLargeError(RobustMatchError):
    """An exhaustive routine refused to run because the input exceeds its size guard."""


class PreconditionError(RobustMatchError):
    """A solver-specific precondition (e.g. chordal-bipartiteness) does not hold."""
