"""Exception hierarchy shared by every copatch module."""

from __future__ import annotations


class CopatchError(Exception):
    """Base class for all errors raised by copatch."""


class SourceMismatch(CopatchError):
    """Two values that must share an endpoint do not."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class PositionOutOfRange(CopatchError):
    pass


class InvalidPatch(CopatchError):
    pass


class InvalidLabel(CopatchError):
    pass


class ValidationError(CopatchError):
    """A value violates one of its structural invariants."""


class NotACocone(CopatchError):
    """The two arrows handed to ``mediating`` do not agree on the span."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NoMediatingMorphism(CopatchError):
    """The map induced by a cocone is not monotone, so it is not a morphism."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(CopatchError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DigestMismatch(CopatchError):
    pass


class TooLarge(CopatchError):
    pass


class NotAConfiguration(CopatchError):
    pass


class BaseMismatch(CopatchError):
    pass


class ConflictedState(CopatchError):
    pass


class NoChange(CopatchError):
    pass


class EventClash(CopatchError):
    pass


class StoreError(CopatchError):
    """The on-disk store is missing or corrupt."""


class NotARepository(CopatchError):
    pass
