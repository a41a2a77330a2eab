"""Exception hierarchy shared by every module."""


class QHError(Exception):
    """Base class for all errors raised by qhnf."""


class ParseError(QHError):
    """Malformed polynomial text or problem file.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if source:
            where.append(source)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class PreconditionError(QHError):
    """An operation was called outside its domain of validity."""


class DivisionError(PreconditionError):
    """Exact division left a nonzero remainder in some degree."""

    def __init__(self, message, degree=None):
        self.degree = degree
        super().__init__(message if degree is None else f"{message} (degree {degree})")


class NotLogarithmicError(DivisionError):
    """A vector field does not leave the separatrix invariant."""


class NonIsolatedError(PreconditionError):
    """The first integral does not have an isolated singularity."""


class NotInIdealError(PreconditionError):
    """A function is not in the Jacobian ideal in some degree slice."""

    def __init__(self, degree):
        self.degree = degree
        super().__init__(f"function is not in the Jacobian ideal in degree slice {degree}")
