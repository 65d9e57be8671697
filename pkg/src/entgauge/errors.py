"""Exception and warning types raised across the package."""


class EntGaugeError(Exception):
    """Base class for all errors raised by entgauge."""


class NumericalError(EntGaugeError):
    """A numerical precondition or algorithm failed."""


class NonUnitaryInput(NumericalError):
    pass


class NonHermitianInput(NumericalError):
    pass


class NotBlockDiagonal(NumericalError):
    pass


class OutOfRange(NumericalError):
    pass


class NotClosed(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NoSolution(NumericalError):
    pass


class InputError(EntGaugeError):
    """Malformed user input (path specs, matrix files, reports).

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class SpecSyntaxError(InputError):
    pass


class UnknownGenerator(InputError):
    def __init__(self, token, line=None, column=None):
        self.token = token
        super().__init__(f"unknown generator token {token!r}", line, column)


class InvalidLength(InputError):
    pass


class DegenerateAngles(UserWarning):
    """The two nonlocal angles coincide; the factorization is not unique."""
