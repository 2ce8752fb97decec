"""Exception hierarchy shared by every module."""


class MblBornError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(MblBornError, ValueError):
    pass


class InvalidParameterError(MblBornError, ValueError):
    pass


class DimensionError(MblBornError, ValueError):
    pass


class SectorViolationError(MblBornError, ValueError):
    """Raised when an operator mixes magnetization sectors."""


class NotHermitianError(MblBornError, ValueError):
    pass


class ConvergenceError(MblBornError, RuntimeError):
    pass


class InvalidDensityError(MblBornError, ValueError):
    pass


class FormatError(MblBornError, ValueError):
    """Malformed input file. ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DegenerateCorruptionError(MblBornError, ValueError):
    pass


class NumericalError(MblBornError, RuntimeError):
    """Non-finite value encountered during training."""


class MissingCheckpointError(MblBornError, FileNotFoundError):
    """A run directory lacks the files needed to rebuild its training trace."""


class MaskSpecError(MblBornError, ValueError):
    pass
