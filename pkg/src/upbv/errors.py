"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(ValueError):
    """Input is well-formed but violates a documented precondition."""


class ResourceError(RuntimeError):
    """A search would exceed its configured budget."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed; usually a tolerance problem."""


class RuleNotApplicable(Exception):
    """A deduction rule's hypotheses do not hold for the given arguments."""
