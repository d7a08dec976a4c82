"""
Exception hierarchy shared by every app.

Management commands map these onto exit codes (see ``EXIT_CODES``).
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(ToolkitError, ValueError):
    """Invalid argument or distribution parameter."""


class DataValidationError(ToolkitError):
    """Input data failed validation."""


class DegenerateInputError(DataValidationError):
    """A column carries no variation and cannot be standardized."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class RowMismatchError(DataValidationError):
    pass


class NonNumericCellError(DataValidationError):

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionError(DataValidationError):
    """Predictor count exceeds the model's padded dimension, or shapes disagree."""


class NumericalError(ToolkitError):
    pass


class LarsPathError(NumericalError):

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ModelFileError(DataValidationError):
    pass


class CorruptModelError(ModelFileError):
    pass


class ModelVersionError(ModelFileError):
    pass


EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

EXIT_CODES = [
    (ParameterError, EXIT_USAGE),
    (DataValidationError, EXIT_DATA),
    (NumericalError, EXIT_NUMERICAL),
]


def exit_code_for(exc):
    """Exit code for a toolkit exception (1 when unmapped)."""
    for exc_class, code in EXIT_CODES:
        if isinstance(exc, exc_class):
            return code
    return 1
