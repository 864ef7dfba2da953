"""Exception types raised by the test pipeline."""


class SymPearsonError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SymPearsonError, ValueError):
    pass


class DegenerateScaleError(SymPearsonError, ArithmeticError):
    """Robust scale (MAD) is zero, so Huber standardization is undefined."""


class SingularDesignError(SymPearsonError, ArithmeticError):
    pass


class NoRootError(SymPearsonError, ArithmeticError):
    """The scale estimating equation shows no sign change in the search range."""


class IllPosedError(SymPearsonError, ValueError):
    pass


class UnderflowError(SymPearsonError, ArithmeticError):
    pass


class PrecisionError(SymPearsonError, ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    ``achieved`` carries the error estimate that was reached.
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3g})")
        self.achieved = achieved


class StageError(SymPearsonError):
    """A pipeline stage failed; the original exception is chained as ``__cause__``."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class CsvParseError(InvalidArgumentError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
