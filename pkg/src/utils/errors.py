"""Exception hierarchy shared by every package, with CLI exit codes."""

from typing import Optional


class BidirError(Exception):
    """Base class for all errors raised by the library."""

    exit_code = 1


class ConfigError(BidirError):
    """Invalid experiment configuration, raised before any compute."""

    exit_code = 2


class DataError(BidirError):
    """Dataset files missing or unusable."""

    exit_code = 3


class ParseError(DataError):
    """Malformed dataset file; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class NumericError(BidirError):
    """A NaN or infinite value was produced."""

    exit_code = 4

    def __init__(self, op: str, detail: str = "", iteration: Optional[int] = None):
        self.op = op
        self.iteration = iteration
        message = f"non-finite value produced by '{op}'"
        if detail:
            message += f": {detail}"
        if iteration is not None:
            message += f" at iteration {iteration}"
        super().__init__(message)


class CheckpointError(BidirError):
    """Corrupt, truncated or incompatible checkpoint file."""

    exit_code = 5

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class DimensionError(BidirError, ValueError):
    """Operand shapes do not agree."""


class RankError(BidirError, ValueError):
    """Tensor has the wrong number of dimensions."""


class CacheError(BidirError, ValueError):
    """Backward pass called with a cache from another network or direction."""
