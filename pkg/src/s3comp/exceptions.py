"""Exception types raised by the s3comp package."""


class S3COMPError(Exception):
    """Base class for all package errors."""


class ZeroColumnError(S3COMPError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has (numerically) zero norm")


class InvalidSpecError(S3COMPError, ValueError):
    pass


class DimTooLargeError(S3COMPError, ValueError):
    pass


class ParseError(S3COMPError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class ShapeMismatchError(S3COMPError, ValueError):
    pass


class LengthMismatchError(S3COMPError, ValueError):
    pass


class DivergentRegularizerError(S3COMPError, ValueError):
    """Raised when the dropout rate is 1, where delta / (1 - delta) diverges."""


class EmptyCandidatesError(S3COMPError, ValueError):
    """No admissible atom is left to start a pursuit with."""


class ConvergenceFailure(S3COMPError, RuntimeError):
    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class SchemaError(S3COMPError, ValueError):
    pass


class StageError(S3COMPError, RuntimeError):
    """Wraps a failure inside one stage of the clustering pipeline."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
