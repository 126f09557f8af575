"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: precondition and parse problems exit 1,
exhausted budgets exit 2.
"""


class BoomerangError(Exception):
    pass


class PreconditionError(BoomerangError, ValueError):
    """An operation was called outside its domain."""


class DimensionError(PreconditionError):
    pass


class SingularMatrixError(PreconditionError, ZeroDivisionError):
    pass


class BudgetExhausted(BoomerangError):
    """A bounded search ran out of budget. Never a refutation."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class CentralOnlyError(PreconditionError):
    """The subgroup has no non-central elements."""


class CertificateError(BoomerangError):
    """A certificate failed to re-verify."""


class IdentityFailure(AssertionError):
    """An identity that is a theorem did not hold: this is a defect."""


class ParseError(PreconditionError):
    def __init__(self, message, line=None, column=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.column = column
        self.source = source
