"""Exception types shared across the package."""


class OctoviscError(Exception):
    """Base class for package errors."""


class DomainError(OctoviscError):
    """Input outside the mathematical domain of an operation."""


class DimensionMismatchError(OctoviscError):
    """Operands have incompatible shapes."""


class ConvergenceError(OctoviscError):
    """An iterative solver exhausted its budget."""


class SingularPointError(OctoviscError):
    """Evaluation requested too close to the singular point."""


class ConeViolationError(OctoviscError):
    """A sampled pair of spectra landed inside the forbidden cone."""


class EmptyTableError(OctoviscError):
    """Operator evaluation against a table with no entries."""


class NotHyperbolicError(OctoviscError):
    """Pencil fails the strict hyperbolicity precondition."""


class SearchFailureError(OctoviscError):
    """Constrained search exhausted its restart budget."""


class ZeroFormError(OctoviscError):
    """Operation requires a nonzero form."""


class ConfigError(OctoviscError):
    """Invalid run configuration."""
