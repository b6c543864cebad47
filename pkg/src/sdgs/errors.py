"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: invalid input/config -> 1,
numerical failures -> 2, file/model I/O failures -> 3.
"""


class SdgsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SdgsError, ValueError):
    """Malformed arguments, shapes, values or configuration."""


class ParseError(InvalidInputError):
    """A data file could not be parsed; message carries line/column."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class NumericalError(SdgsError, ArithmeticError):
    """Base for failures of the numerical routines."""


class DegenerateProjectionError(NumericalError):
    """The random sketch produced a singular core matrix beyond repair."""


class NumericalDivergenceError(NumericalError):
    """An iterative routine produced a non-finite objective."""


class ModelFileError(SdgsError, IOError):
    """Base for persisted-model problems."""


class CorruptModelError(ModelFileError):
    """Model file is truncated, has a bad magic or a bad checksum."""


class UnsupportedVersionError(ModelFileError):
    """Model file declares a format version this build cannot read."""
