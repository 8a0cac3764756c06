"""Exception types shared across the package."""


class ContractError(ValueError):
    """A caller violated a documented precondition."""


class DivergedError(RuntimeError):
    """Training produced a non-finite loss or update.

    Carries the run record accumulated up to the last finite epoch.
    """

    def __init__(self, message, record_prefix=None):
        super().__init__(message)
        self.record_prefix = record_prefix


class MalformedFileError(ValueError):
    """A binary data file has an impossible size or structure."""


class CorruptRecordError(ValueError):
    """A single record inside a data file is invalid."""

    def __init__(self, message, record_index):
        super().__init__(message)
        self.record_index = record_index


class UnsupportedDimensionError(ValueError):
    """A 2-D-only operation was called on a different input dimension."""


class UndefinedDenominatorError(ValueError):
    """The normalizing weight vector has zero Frobenius norm."""


class CheckpointError(ValueError):
    """Base class for checkpoint container problems."""


class CheckpointVersionError(CheckpointError):
    """Unrecognized checkpoint format version."""


class CheckpointCountError(CheckpointError):
    """Parameter count in the file disagrees with the architecture."""


class CheckpointTruncatedError(CheckpointError):
    """The parameter payload is shorter than the header promises."""


class ConfigError(ValueError):
    """Bad or unknown keys in an experiment configuration document."""
