"""Errors raised by the checkers and the front end."""
from __future__ import annotations


class CheckError(Exception):
    """Base class for typing failures in either calculus."""

    kind = "TypeError"

    def __init__(self, message: str, location: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.location = location

    def __str__(self) -> str:
        where = f" at {self.location[0]}:{self.location[1]}" if self.location else ""
        return f"{self.kind}{where}: {self.message}"


class Unbound(CheckError):
    kind = "Unbound"


class LinearUnused(CheckError):
    kind = "LinearUnused"


class LinearReused(CheckError):
    kind = "LinearReused"


class Mismatch(CheckError):
    kind = "Mismatch"


class NotSession(CheckError):
    kind = "NotSession"


class BranchMismatch(CheckError):
    kind = "BranchMismatch"


class UnlimitedViolation(CheckError):
    kind = "UnlimitedViolation"


class NotDual(CheckError):
    kind = "NotDual"


class CannotInfer(CheckError):
    """A binder's type is not determined by its uses; add an annotation."""

    kind = "CannotInfer"


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
