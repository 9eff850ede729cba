"""Exception types raised by the apml package."""


class APMLError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(APMLError, ValueError):
    pass


class EmptyInput(APMLError, ValueError):
    pass


class NonFiniteInput(APMLError, ValueError):
    pass


class NonPositiveTemperature(APMLError, ValueError):
    """Raised when ``p_min <= 1/K`` so the closed-form temperature is not positive."""


class DegenerateMarginal(APMLError, ValueError):
    """Raised when a row or column of a matrix to be normalized is entirely zero."""


class BatchMismatch(APMLError, ValueError):
    pass


class OracleLimit(APMLError, ValueError):
    """Raised when the brute-force EMD oracle is asked for an instance it cannot enumerate."""


class ParseError(APMLError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(APMLError, ValueError):
    pass


class DivergenceError(APMLError, RuntimeError):
    def __init__(self, message, step):
        super().__init__(f"step {step}: {message}")
        self.step = step
