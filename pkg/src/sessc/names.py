"""Names, type variables and the fresh-name supply."""
from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Name:
    base: str
    uid: int = 0

    def __str__(self) -> str:
        return self.base if self.uid == 0 else f"{self.base}#{self.uid}"

    __repr__ = __str__


@dataclass(frozen=True, order=True)
class TypeVar:
    ident: str
    dual: bool = False

    def flip(self) -> TypeVar:
        return TypeVar(self.ident, not self.dual)

    @property
    def positive(self) -> TypeVar:
        return TypeVar(self.ident) if self.dual else self

    def __str__(self) -> str:
        return ("~" if self.dual else "") + self.ident

    __repr__ = __str__


class NameSupply:
    """Hands out names with strictly increasing uids.

    One supply per pipeline run; not thread safe.
    """

    def __init__(self, start: int = 1):
        self._counter = itertools.count(max(start, 1))

    def fresh(self, base: str | Name = "x") -> Name:
        if isinstance(base, Name):
            base = base.base
        return Name(base, next(self._counter))

    def bump(self, *names: Name) -> None:
        """Make sure future uids exceed those of ``names``."""
        top = max((n.uid for n in names), default=0)
        current = next(self._counter)
        self._counter = itertools.count(max(current, top + 1))


def fresh_tyvar(ident: str, avoid: set[str]) -> str:
    candidate = ident + "'"
    while candidate in avoid:
        candidate += "'"
    return candidate
