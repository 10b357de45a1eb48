"""HGV session types and value types.

Session types and the three non-session type formers share one union; a
session type is simply a type built from the session constructors.
Unification variables (``Hole``) appear only while a term is being checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from .names import TypeVar, fresh_tyvar


@dataclass(frozen=True)
class Output:
    payload: "Type"
    cont: "Type"


@dataclass(frozen=True)
class Input:
    payload: "Type"
    cont: "Type"


@dataclass(frozen=True)
class Plus:
    branches: tuple[tuple[str, "Type"], ...]


@dataclass(frozen=True)
class With:
    branches: tuple[tuple[str, "Type"], ...]


@dataclass(frozen=True)
class EndOut:
    pass


@dataclass(frozen=True)
class EndIn:
    pass


@dataclass(frozen=True)
class SVar:
    var: TypeVar


@dataclass(frozen=True)
class OutputType:
    var: str
    cont: "Type"


@dataclass(frozen=True)
class InputType:
    var: str
    cont: "Type"


@dataclass(frozen=True)
class Server:
    body: "Type"


@dataclass(frozen=True)
class Service:
    body: "Type"


@dataclass(frozen=True)
class LinFun:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class UnFun:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Times:
    left: "Type"
    right: "Type"


class Meta:
    """A mutable unification cell; compared by identity."""

    _ids = itertools.count()

    def __init__(self) -> None:
        self.id = next(Meta._ids)
        self.solution: Type | None = None
        self.session_only = False

    def __repr__(self) -> str:
        return f"?{self.id}"


@dataclass(frozen=True)
class Hole:
    meta: Meta
    dual: bool = False


Type = Union[Output, Input, Plus, With, EndOut, EndIn, SVar, OutputType, InputType,
             Server, Service, LinFun, UnFun, Times, Hole]

SESSION_CLASSES = (Output, Input, Plus, With, EndOut, EndIn, SVar, OutputType,
                   InputType, Server, Service)

END_OUT = EndOut()
END_IN = EndIn()


class NotASession(Exception):
    pass


def tyvar(ident: str, dual: bool = False) -> SVar:
    return SVar(TypeVar(ident, dual))


def resolve(t: Type) -> Type:
    """Follow solved holes at the root only."""
    while isinstance(t, Hole) and t.meta.solution is not None:
        inner = t.meta.solution
        t = dual(inner) if t.dual else inner
    return t


def zonk(t: Type, ground: bool = False) -> Type:
    """Substitute solved holes; with ``ground``, default unsolved ones to end!."""
    t = resolve(t)
    if ground and isinstance(t, Hole):
        t.meta.solution = END_IN if t.dual else END_OUT
        return END_OUT
    z = lambda u: zonk(u, ground)  # noqa: E731
    match t:
        case Output(p, c):
            return Output(z(p), z(c))
        case Input(p, c):
            return Input(z(p), z(c))
        case Plus(bs):
            return Plus(tuple((l, z(s)) for l, s in bs))
        case With(bs):
            return With(tuple((l, z(s)) for l, s in bs))
        case OutputType(x, c):
            return OutputType(x, z(c))
        case InputType(x, c):
            return InputType(x, z(c))
        case Server(s):
            return Server(z(s))
        case Service(s):
            return Service(z(s))
        case LinFun(a, b):
            return LinFun(z(a), z(b))
        case UnFun(a, b):
            return UnFun(z(a), z(b))
        case Times(a, b):
            return Times(z(a), z(b))
    return t


def has_holes(t: Type) -> bool:
    t = resolve(t)
    match t:
        case Hole():
            return True
        case Output(p, c) | Input(p, c) | LinFun(p, c) | UnFun(p, c) | Times(p, c):
            return has_holes(p) or has_holes(c)
        case Plus(bs) | With(bs):
            return any(has_holes(s) for _, s in bs)
        case OutputType(_, c) | InputType(_, c) | Server(c) | Service(c):
            return has_holes(c)
    return False


def is_session(t: Type) -> bool:
    t = resolve(t)
    if isinstance(t, Hole):
        return True
    return isinstance(t, SESSION_CLASSES)


def dual(s: Type) -> Type:
    """Session duality. Payload types are left untouched."""
    match s:
        case Output(p, c):
            return Input(p, dual(c))
        case Input(p, c):
            return Output(p, dual(c))
        case Plus(bs):
            return With(tuple((l, dual(b)) for l, b in bs))
        case With(bs):
            return Plus(tuple((l, dual(b)) for l, b in bs))
        case EndOut():
            return END_IN
        case EndIn():
            return END_OUT
        case SVar(v):
            return SVar(v.flip())
        case OutputType(x, c):
            return InputType(x, dual(c))
        case InputType(x, c):
            return OutputType(x, dual(c))
        case Server(b):
            return Service(dual(b))
        case Service(b):
            return Server(dual(b))
        case Hole(m, d):
            if m.solution is not None:
                return dual(resolve(s))
            m.session_only = True
            return Hole(m, not d)
    raise NotASession(s)


def is_unlimited(t: Type) -> bool:
    t = resolve(t)
    return isinstance(t, (Service, UnFun, EndIn))


def free_tyvars(t: Type) -> set[str]:
    t = resolve(t)
    match t:
        case SVar(v):
            return {v.ident}
        case Output(p, c) | Input(p, c) | LinFun(p, c) | UnFun(p, c) | Times(p, c):
            return free_tyvars(p) | free_tyvars(c)
        case Plus(bs) | With(bs):
            return set().union(*(free_tyvars(b) for _, b in bs))
        case OutputType(x, c) | InputType(x, c):
            return free_tyvars(c) - {x}
        case Server(c) | Service(c):
            return free_tyvars(c)
    return set()


def all_tyvars(t: Type) -> set[str]:
    t = resolve(t)
    match t:
        case SVar(v):
            return {v.ident}
        case Output(p, c) | Input(p, c) | LinFun(p, c) | UnFun(p, c) | Times(p, c):
            return all_tyvars(p) | all_tyvars(c)
        case Plus(bs) | With(bs):
            return set().union(*(all_tyvars(b) for _, b in bs))
        case OutputType(x, c) | InputType(x, c):
            return all_tyvars(c) | {x}
        case Server(c) | Service(c):
            return all_tyvars(c)
    return set()


def subst(t: Type, x: str, s: Type) -> Type:
    """Replace X by ``s`` and ~X by ``dual(s)``, renaming binders that would capture."""
    fv = free_tyvars(s)
    return _subst(t, x, s, fv)


def _subst(t: Type, x: str, s: Type, fv: set[str]) -> Type:
    t = resolve(t)
    match t:
        case SVar(v):
            if v.ident != x:
                return t
            return dual(s) if v.dual else s
        case Output(p, c):
            return Output(_subst(p, x, s, fv), _subst(c, x, s, fv))
        case Input(p, c):
            return Input(_subst(p, x, s, fv), _subst(c, x, s, fv))
        case LinFun(a, b):
            return LinFun(_subst(a, x, s, fv), _subst(b, x, s, fv))
        case UnFun(a, b):
            return UnFun(_subst(a, x, s, fv), _subst(b, x, s, fv))
        case Times(a, b):
            return Times(_subst(a, x, s, fv), _subst(b, x, s, fv))
        case Plus(bs):
            return Plus(tuple((l, _subst(b, x, s, fv)) for l, b in bs))
        case With(bs):
            return With(tuple((l, _subst(b, x, s, fv)) for l, b in bs))
        case Server(c):
            return Server(_subst(c, x, s, fv))
        case Service(c):
            return Service(_subst(c, x, s, fv))
        case OutputType(y, c) | InputType(y, c):
            make = type(t)
            if y == x or x not in free_tyvars(c):
                return t
            if y in fv:
                y2 = fresh_tyvar(y, fv | all_tyvars(c) | {x})
                c = _subst(c, y, tyvar(y2), {y2})
                y = y2
            return make(y, _subst(c, x, s, fv))
    return t


def rename_tyvar(t: Type, old: str, new: str) -> Type:
    return subst(t, old, tyvar(new))


def _sorted(bs):
    return sorted(bs, key=lambda kv: kv[0])


def type_eq(a: Type, b: Type) -> bool:
    """Structural equality modulo alpha on type binders and branch order."""
    return _eq(a, b, {}, {})


def _eq(a: Type, b: Type, ea: dict, eb: dict) -> bool:
    a, b = resolve(a), resolve(b)
    if isinstance(a, Hole) or isinstance(b, Hole):
        return a == b
    if type(a) is not type(b):
        return False
    match a:
        case SVar(v):
            w = b.var
            if v.dual != w.dual:
                return False
            ia, ib = ea.get(v.ident), eb.get(w.ident)
            if ia is None and ib is None:
                return v.ident == w.ident
            return ia == ib
        case Output() | Input():
            return _eq(a.payload, b.payload, ea, eb) and _eq(a.cont, b.cont, ea, eb)
        case LinFun() | UnFun():
            return _eq(a.dom, b.dom, ea, eb) and _eq(a.cod, b.cod, ea, eb)
        case Times():
            return _eq(a.left, b.left, ea, eb) and _eq(a.right, b.right, ea, eb)
        case Plus() | With():
            la, lb = _sorted(a.branches), _sorted(b.branches)
            if [l for l, _ in la] != [l for l, _ in lb]:
                return False
            return all(_eq(x, y, ea, eb) for (_, x), (_, y) in zip(la, lb))
        case Server() | Service():
            return _eq(a.body, b.body, ea, eb)
        case OutputType() | InputType():
            depth = len(ea)
            return _eq(a.cont, b.cont, {**ea, a.var: depth}, {**eb, b.var: depth})
    return True


def branch_labels(bs) -> list[str]:
    return [l for l, _ in bs]


def lookup_branch(bs, label: str):
    for l, t in bs:
        if l == label:
            return t
    return None


# printing

def show_type(t: Type) -> str:
    return _show(t, 0)


def _atomic(t: Type) -> bool:
    return isinstance(resolve(t), (EndOut, EndIn, SVar, Hole, Plus, With))


def _show(t: Type, prec: int) -> str:
    t = resolve(t)
    match t:
        case EndOut():
            return "end!"
        case EndIn():
            return "end?"
        case SVar(v):
            return str(v)
        case Hole(m, d):
            return ("~" if d else "") + repr(m)
        case Output(p, c):
            out = f"!{_payload(p)}.{_show(c, 3)}"
        case Input(p, c):
            out = f"?{_payload(p)}.{_show(c, 3)}"
        case Plus(bs):
            return "(+){" + ", ".join(f"{l}: {_show(s, 0)}" for l, s in bs) + "}"
        case With(bs):
            return "(&){" + ", ".join(f"{l}: {_show(s, 0)}" for l, s in bs) + "}"
        case OutputType(x, c):
            out = f"!!{x}.{_show(c, 3)}"
        case InputType(x, c):
            out = f"??{x}.{_show(c, 3)}"
        case Server(c):
            out = f"#{_show(c, 3)}"
        case Service(c):
            out = f"@{_show(c, 3)}"
        case Times(a, b):
            out = f"{_show(a, 2)} * {_show(b, 1)}"
            return f"({out})" if prec > 1 else out
        case LinFun(a, b):
            out = f"{_show(a, 1)} -o {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case UnFun(a, b):
            out = f"{_show(a, 1)} -> {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case _:
            raise TypeError(f"not a type: {t!r}")
    return out


def _payload(p: Type) -> str:
    return _show(p, 3) if _atomic(p) else f"({_show(p, 0)})"


for _cls in (Output, Input, Plus, With, EndOut, EndIn, SVar, OutputType, InputType,
             Server, Service, LinFun, UnFun, Times):
    _cls.__str__ = show_type  # type: ignore[assignment]
