"""Exception hierarchy shared across the package."""


class ConeRegError(Exception):
    """Base class for all package errors."""


class DomainError(ConeRegError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularMatrixError(ConeRegError, ArithmeticError):
    """A factorization hit a non-positive or negligible pivot.

    Attributes
    ----------
    pivot : int
        Zero-based index of the failing pivot.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SingularDesignError(SingularMatrixError):
    """The stacked design matrix is rank deficient."""

    def __init__(self, message, pivot=None, column=None):
        super().__init__(message, pivot)
        self.column = column


class SingularRayError(ConeRegError, ArithmeticError):
    """The image of a ray under an affine operator is vertical."""


class DiagnosticsError(ConeRegError, ArithmeticError):
    """The predictor range covariance matrix is singular."""


class SchemaError(ConeRegError, ValueError):
    """An input file does not follow the interval CSV schema."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column
