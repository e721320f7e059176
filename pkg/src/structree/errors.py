"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class StructreeError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1


class InputError(StructreeError, ValueError):
    """Malformed arguments: unknown letters, bad radii, foreign windows."""


class DataError(StructreeError):
    """Inconsistent group data, e.g. a rule table with a missing entry."""


class GroupFileError(DataError):
    def __init__(self, message: str, path: str = "<group>", line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class NotACutError(InputError):
    """A proposed side (or its complement) is disconnected.

    ``parts`` holds the components of the offending set as sorted id lists.
    """

    def __init__(self, message: str, parts: list[list[str]]):
        self.parts = parts
        super().__init__(message)


class ConsistencyError(StructreeError):
    """An invariant that must hold for correct inputs was violated.

    Usually means the window radius or the weight bound is too small.
    """

    exit_code = 2


class WindowTooSmallError(StructreeError):
    exit_code = 3


class MarginError(WindowTooSmallError):
    """A group element moved something out of the window."""


class UnsupportedBackendError(StructreeError):
    pass
