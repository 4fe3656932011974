"""Exception taxonomy shared by every module.

The CLI maps these onto exit codes: content problems (DataError and
subclasses, ConfigError, SamplingError) exit 2, internal invariant
violations (ShapeError, ContractError) exit 3.
"""


class SentibertError(Exception):
    """Base class for all library errors."""


class ShapeError(SentibertError):
    """Tensor shapes incompatible with the requested operation."""


class ContractError(SentibertError):
    """An API precondition or internal invariant was violated."""


class ConfigError(SentibertError):
    """Invalid configuration value or dataset composition."""


class DataError(SentibertError):
    """Malformed or unusable input data (carries line numbers when known)."""


class CheckpointError(DataError):
    """Unreadable, corrupt, or incompatible checkpoint file."""


class SamplingError(SentibertError):
    """A requested random draw is impossible (e.g. no other document to sample from)."""
