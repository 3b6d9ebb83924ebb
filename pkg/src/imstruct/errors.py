"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument falls outside the domain an operation is defined on."""


class DataError(ValueError):
    """Input data is malformed (missing column, non-numeric cell, ...)."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class RankDeficiencyError(ArithmeticError):
    """A least-squares design does not have full column rank.

    ``columns`` holds the names (or indices) of the columns found to be
    linearly dependent on the ones preceding them.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class StaleTableError(ValueError):
    """A reference table was built for a different design, prior or universe."""
