"""HGV terms, free variables, renaming and alpha keys."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from .names import Name
from .sessions import Type, show_type, zonk


@dataclass(frozen=True)
class Var:
    name: Name


@dataclass(frozen=True)
class Lam:
    binder: Name
    dom: Type | None
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class LetPair:
    x: Name
    y: Name
    scrutinee: "Term"
    body: "Term"


@dataclass(frozen=True)
class Send:
    payload: "Term"
    chan: "Term"


@dataclass(frozen=True)
class Receive:
    chan: "Term"


@dataclass(frozen=True)
class Select:
    label: str
    chan: "Term"


@dataclass(frozen=True)
class Case:
    scrutinee: "Term"
    branches: tuple[tuple[str, Name, "Term"], ...]


@dataclass(frozen=True)
class Fork:
    binder: Name
    body: "Term"
    ann: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Link:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class SendType:
    stype: Type
    chan: "Term"


@dataclass(frozen=True)
class ReceiveType:
    var: str
    chan: "Term"


@dataclass(frozen=True)
class Serve:
    binder: Name
    body: "Term"
    ann: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Request:
    chan: "Term"


@dataclass(frozen=True)
class CoerceUn:
    """Unlimited-function introduction: the annotation is the ``T -> U`` produced."""
    term: "Term"
    ann: Type


@dataclass(frozen=True)
class CoerceLin:
    """Unlimited-function elimination: the annotation is the ``T -o U`` produced."""
    term: "Term"
    ann: Type


@dataclass(frozen=True)
class Discard:
    """Marks where an unlimited ``var`` is weakened; behaves as ``body``."""
    var: Name
    body: "Term"


# surface sugar, removed by hgv.desugar

@dataclass(frozen=True)
class Let:
    binder: Name
    bound: "Term"
    body: "Term"
    ann: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Connect:
    binder: Name
    proc: "Term"
    body: "Term"


Term = Union[Var, Lam, App, Pair, LetPair, Send, Receive, Select, Case, Fork, Link,
             SendType, ReceiveType, Serve, Request, CoerceUn, CoerceLin, Discard, Let, Connect]

TERM_CLASSES = (Var, Lam, App, Pair, LetPair, Send, Receive, Select, Case, Fork, Link,
                SendType, ReceiveType, Serve, Request, CoerceUn, CoerceLin, Discard, Let, Connect)


def _fv(m: Term) -> frozenset[Name]:
    match m:
        case Var(x):
            return frozenset((x,))
        case Lam(x, _, b) | Fork(x, b) | Serve(x, b):
            return b.fv - {x}
        case App(a, b) | Pair(a, b) | Send(a, b) | Link(a, b):
            return a.fv | b.fv
        case LetPair(x, y, s, b):
            return s.fv | (b.fv - {x, y})
        case Receive(c) | Select(_, c) | SendType(_, c) | ReceiveType(_, c) | Request(c) | \
                CoerceUn(c) | CoerceLin(c):
            return c.fv
        case Case(s, bs):
            return s.fv.union(*(b.fv - {x} for _, x, b in bs))
        case Discard(x, b):
            return b.fv | {x}
        case Let(x, a, b) | Connect(x, a, b):
            extra = a.fv - {x} if isinstance(m, Connect) else a.fv
            return extra | (b.fv - {x})
    raise TypeError(f"not a term: {m!r}")


for _cls in TERM_CLASSES:
    _cls.fv = cached_property(_fv)  # type: ignore[attr-defined]
    _cls.fv.__set_name__(_cls, "fv")


def free_vars(m: Term) -> frozenset[Name]:
    return m.fv


def subterms(m: Term) -> list[Term]:
    match m:
        case Var():
            return []
        case Lam(_, _, b) | Fork(_, b) | Serve(_, b):
            return [b]
        case App(a, b) | Pair(a, b) | Send(a, b) | Link(a, b):
            return [a, b]
        case LetPair(_, _, s, b) | Let(_, s, b) | Connect(_, s, b):
            return [s, b]
        case Receive(c) | Select(_, c) | SendType(_, c) | ReceiveType(_, c) | Request(c) | \
                CoerceUn(c) | CoerceLin(c):
            return [c]
        case Case(s, bs):
            return [s] + [b for _, _, b in bs]
        case Discard(_, b):
            return [b]
    raise TypeError(f"not a term: {m!r}")


def term_names(m: Term) -> set[Name]:
    out = set(m.fv)
    stack = [m]
    while stack:
        t = stack.pop()
        match t:
            case Lam(x, _, _) | Fork(x, _) | Serve(x, _) | Let(x, _, _) | Connect(x, _, _):
                out.add(x)
            case LetPair(x, y, _, _):
                out |= {x, y}
            case Case(_, bs):
                out |= {x for _, x, _ in bs}
        stack.extend(subterms(t))
    return out


def rename_term(m: Term, new: Name, old: Name) -> Term:
    """``m{new/old}``; binders are assumed distinct from ``new`` (Barendregt)."""
    if old not in m.fv or old == new:
        return m
    r = lambda t: rename_term(t, new, old)  # noqa: E731
    match m:
        case Var(x):
            return Var(new) if x == old else m
        case Lam(x, d, b):
            return Lam(x, d, r(b))
        case Fork(x, b, a):
            return Fork(x, r(b), a)
        case Serve(x, b, a):
            return Serve(x, r(b), a)
        case App(a, b):
            return App(r(a), r(b))
        case Pair(a, b):
            return Pair(r(a), r(b))
        case Send(a, b):
            return Send(r(a), r(b))
        case Link(a, b):
            return Link(r(a), r(b))
        case LetPair(x, y, s, b):
            return LetPair(x, y, r(s), b if old in (x, y) else r(b))
        case Receive(c):
            return Receive(r(c))
        case Select(l, c):
            return Select(l, r(c))
        case SendType(s, c):
            return SendType(s, r(c))
        case ReceiveType(v, c):
            return ReceiveType(v, r(c))
        case Request(c):
            return Request(r(c))
        case CoerceUn(c, a):
            return CoerceUn(r(c), a)
        case CoerceLin(c, a):
            return CoerceLin(r(c), a)
        case Case(s, bs):
            return Case(r(s), tuple((l, x, b if x == old else r(b)) for l, x, b in bs))
        case Discard(x, b):
            return Discard(new if x == old else x, r(b))
        case Let(x, a, b, ann):
            return Let(x, r(a), b if x == old else r(b), ann)
        case Connect(x, a, b):
            return Connect(x, a if x == old else r(a), b if x == old else r(b))
    raise TypeError(f"not a term: {m!r}")


def alpha_key(m: Term) -> tuple:
    """Encoding identical exactly for alpha-equivalent terms.

    Fork/serve binder annotations are ignored; lambda and coercion annotations count.
    """
    counter = [0]

    def tok(n: Name, env: dict):
        return ("b", env[n]) if n in env else ("f", n.base, n.uid)

    def bind(env: dict, *ns: Name) -> dict:
        env = dict(env)
        for n in ns:
            counter[0] += 1
            env[n] = counter[0]
        return env

    def ty(t):
        return show_type(zonk(t)) if t is not None else None

    def go(t: Term, env: dict) -> tuple:
        match t:
            case Var(x):
                return ("var", tok(x, env))
            case Lam(x, d, b):
                e = bind(env, x)
                return ("lam", ty(d), go(b, e))
            case Fork(x, b) | Serve(x, b):
                e = bind(env, x)
                return (type(t).__name__, go(b, e))
            case LetPair(x, y, s, b):
                s_key = go(s, env)
                return ("letpair", s_key, go(b, bind(env, x, y)))
            case Let(x, a, b):
                a_key = go(a, env)
                return ("let", a_key, go(b, bind(env, x)))
            case Connect(x, a, b):
                e = bind(env, x)
                return ("connect", go(a, e), go(b, e))
            case Case(s, bs):
                s_key = go(s, env)
                return ("case", s_key) + tuple((l, go(b, bind(env, x))) for l, x, b in bs)
            case Select(l, c):
                return ("select", l, go(c, env))
            case SendType(s, c):
                return ("sendty", ty(s), go(c, env))
            case ReceiveType(v, c):
                return ("recvty", v, go(c, env))
            case CoerceUn(c, a) | CoerceLin(c, a):
                return (type(t).__name__, ty(a), go(c, env))
            case Discard(x, b):
                return ("discard", tok(x, env), go(b, env))
        return (type(t).__name__,) + tuple(go(s, env) for s in subterms(t))

    return go(m, {})


def alpha_eq(a: Term, b: Term) -> bool:
    return alpha_key(a) == alpha_key(b)


# printing

def show_term(m: Term) -> str:
    return _show(m, 0)


def _ann(t: Type | None) -> str:
    return f":{show_type(t)}" if t is not None else ""


def _show(m: Term, prec: int) -> str:
    """prec 0: anything; 1: application head/args context; 2: atom."""
    match m:
        case Var(x):
            return str(x)
        case Pair(a, b):
            return f"({_show(a, 0)}, {_show(b, 0)})"
        case CoerceUn(c, a) | CoerceLin(c, a):
            return f"({_show(c, 0)} : {show_type(a)})"
        case Case(s, bs):
            inner = "; ".join(f"{l}({x}). {_show(b, 0)}" for l, x, b in bs)
            return f"case {_show(s, 0)} {{ {inner} }}"
        case App(f, a):
            out = f"{_show(f, 1)} {_show(a, 2)}"
            return f"({out})" if prec > 1 else out
        case Send(a, c):
            out = f"send {_show(a, 2)} {_show(c, 2)}"
        case Receive(c):
            out = f"receive {_show(c, 2)}"
        case Select(l, c):
            out = f"select {l} {_show(c, 2)}"
        case Link(a, b):
            out = f"link {_show(a, 2)} {_show(b, 2)}"
        case SendType(s, c):
            out = f"sendty {_tyatom(s)} {_show(c, 2)}"
        case Request(c):
            out = f"request {_show(c, 2)}"
        case Lam(x, d, b):
            out = f"fn {x}{_ann(d)}. {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case Fork(x, b, a):
            out = f"fork {x}{_ann(a)}. {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case Serve(x, b, a):
            out = f"serve {x}{_ann(a)}. {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case ReceiveType(v, c):
            out = f"recvty {v}. {_show(c, 0)}"
            return f"({out})" if prec > 0 else out
        case LetPair(x, y, s, b):
            out = f"let ({x}, {y}) = {_show(s, 0)} in {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case Discard(x, b):
            out = f"discard {x} in {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case Let(x, a, b):
            out = f"let {x} = {_show(a, 0)} in {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case Connect(x, a, b):
            out = f"with {x} connect {_show(a, 0)} to {_show(b, 0)}"
            return f"({out})" if prec > 0 else out
        case _:
            raise TypeError(f"not a term: {m!r}")
    return f"({out})" if prec > 1 else out


def _tyatom(t: Type) -> str:
    s = show_type(t)
    return s if " " not in s else f"({s})"


for _cls in TERM_CLASSES:
    _cls.__str__ = show_term  # type: ignore[assignment]
