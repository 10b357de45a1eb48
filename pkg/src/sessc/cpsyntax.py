"""CP propositions and processes: duality, substitution, free names, alpha keys."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from .names import Name, TypeVar, fresh_tyvar

# propositions


@dataclass(frozen=True)
class Tensor:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Par:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Oplus:
    branches: tuple[tuple[str, "Prop"], ...]


@dataclass(frozen=True)
class Amp:
    branches: tuple[tuple[str, "Prop"], ...]


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class OfCourse:
    body: "Prop"


@dataclass(frozen=True)
class WhyNot:
    body: "Prop"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Prop"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Prop"


@dataclass(frozen=True)
class PVar:
    var: TypeVar


class PMeta:
    """A unification cell for an unannotated cut binder; compared by identity."""

    def __init__(self, ident: int):
        self.id = ident
        self.solution: Prop | None = None


@dataclass(frozen=True)
class PHole:
    meta: PMeta
    dual: bool = False


Prop = Union[Tensor, Par, Oplus, Amp, One, Bottom, OfCourse, WhyNot, Exists, Forall, PVar,
             PHole]

ONE = One()
BOTTOM = Bottom()


def pvar(ident: str, dual: bool = False) -> PVar:
    return PVar(TypeVar(ident, dual))


def resolve_prop(a: Prop) -> Prop:
    while isinstance(a, PHole) and a.meta.solution is not None:
        a = dual_prop(a.meta.solution) if a.dual else a.meta.solution
    return a


def dual_prop(a: Prop) -> Prop:
    match a:
        case PHole(m, d):
            if m.solution is not None:
                return dual_prop(resolve_prop(a))
            return PHole(m, not d)
        case Tensor(l, r):
            return Par(dual_prop(l), dual_prop(r))
        case Par(l, r):
            return Tensor(dual_prop(l), dual_prop(r))
        case Oplus(bs):
            return Amp(tuple((k, dual_prop(b)) for k, b in bs))
        case Amp(bs):
            return Oplus(tuple((k, dual_prop(b)) for k, b in bs))
        case One():
            return BOTTOM
        case Bottom():
            return ONE
        case OfCourse(b):
            return WhyNot(dual_prop(b))
        case WhyNot(b):
            return OfCourse(dual_prop(b))
        case Exists(x, b):
            return Forall(x, dual_prop(b))
        case Forall(x, b):
            return Exists(x, dual_prop(b))
        case PVar(v):
            return PVar(v.flip())
    raise TypeError(f"not a proposition: {a!r}")


def prop_tyvars(a: Prop, bound: bool = False) -> set[str]:
    """Free type variables (or all of them, binders included, when ``bound``)."""
    match a:
        case PVar(v):
            return {v.ident}
        case Tensor(l, r) | Par(l, r):
            return prop_tyvars(l, bound) | prop_tyvars(r, bound)
        case Oplus(bs) | Amp(bs):
            return set().union(*(prop_tyvars(b, bound) for _, b in bs))
        case OfCourse(b) | WhyNot(b):
            return prop_tyvars(b, bound)
        case Exists(x, b) | Forall(x, b):
            inner = prop_tyvars(b, bound)
            return inner | {x} if bound else inner - {x}
    return set()


def subst_prop(a: Prop, x: str, s: Prop) -> Prop:
    """Replace X by ``s`` and X-dual by ``dual_prop(s)``, avoiding capture."""
    return _psubst(a, x, s, prop_tyvars(s))


def _psubst(a: Prop, x: str, s: Prop, fv: set[str]) -> Prop:
    match a:
        case PVar(v):
            if v.ident != x:
                return a
            return dual_prop(s) if v.dual else s
        case Tensor(l, r):
            return Tensor(_psubst(l, x, s, fv), _psubst(r, x, s, fv))
        case Par(l, r):
            return Par(_psubst(l, x, s, fv), _psubst(r, x, s, fv))
        case Oplus(bs):
            return Oplus(tuple((k, _psubst(b, x, s, fv)) for k, b in bs))
        case Amp(bs):
            return Amp(tuple((k, _psubst(b, x, s, fv)) for k, b in bs))
        case OfCourse(b):
            return OfCourse(_psubst(b, x, s, fv))
        case WhyNot(b):
            return WhyNot(_psubst(b, x, s, fv))
        case Exists(y, b) | Forall(y, b):
            make = type(a)
            if y == x or x not in prop_tyvars(b):
                return a
            if y in fv:
                y2 = fresh_tyvar(y, fv | prop_tyvars(b, True) | {x})
                b = _psubst(b, y, pvar(y2), {y2})
                y = y2
            return make(y, _psubst(b, x, s, fv))
    return a


def prop_eq(a: Prop, b: Prop) -> bool:
    """Equality modulo alpha on quantifiers and branch order."""
    return prop_key(a) == prop_key(b)


def prop_key(a: Prop, env: dict[str, int] | None = None) -> tuple:
    env = env or {}
    match a:
        case PVar(v):
            ix = env.get(v.ident)
            return ("var", v.dual, ("b", ix) if ix is not None else ("f", v.ident))
        case Tensor(l, r) | Par(l, r):
            return (type(a).__name__, prop_key(l, env), prop_key(r, env))
        case Oplus(bs) | Amp(bs):
            return (type(a).__name__,) + tuple(sorted((k, prop_key(b, env)) for k, b in bs))
        case OfCourse(b) | WhyNot(b):
            return (type(a).__name__, prop_key(b, env))
        case Exists(x, b) | Forall(x, b):
            return (type(a).__name__, prop_key(b, {**env, x: len(env)}))
    return (type(a).__name__,)


def is_whynot(a: Prop | None) -> bool:
    return isinstance(a, WhyNot)


# processes


@dataclass(frozen=True)
class LinkP:
    left: Name
    right: Name


@dataclass(frozen=True)
class Cut:
    name: Name
    left: "Process"
    right: "Process"
    ann: Prop | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Out:
    chan: Name
    fresh: Name
    payload: "Process"
    cont: "Process"


@dataclass(frozen=True)
class In:
    chan: Name
    fresh: Name
    cont: "Process"


@dataclass(frozen=True)
class Inject:
    chan: Name
    label: str
    cont: "Process"


@dataclass(frozen=True)
class CaseP:
    chan: Name
    branches: tuple[tuple[str, "Process"], ...]


@dataclass(frozen=True)
class Bang:
    chan: Name
    fresh: Name
    body: "Process"


@dataclass(frozen=True)
class Query:
    chan: Name
    fresh: Name
    cont: "Process"


@dataclass(frozen=True)
class OutType:
    chan: Name
    prop: Prop
    cont: "Process"


@dataclass(frozen=True)
class InType:
    chan: Name
    var: str
    cont: "Process"


@dataclass(frozen=True)
class EmptyOut:
    chan: Name


@dataclass(frozen=True)
class EmptyIn:
    chan: Name
    cont: "Process"


Process = Union[LinkP, Cut, Out, In, Inject, CaseP, Bang, Query, OutType, InType,
                EmptyOut, EmptyIn]


def _fn(p: Process) -> frozenset[Name]:
    match p:
        case LinkP(x, y):
            return frozenset((x, y))
        case Cut(x, l, r):
            return (l.fn | r.fn) - {x}
        case Out(x, y, a, b):
            return (a.fn - {y}) | b.fn | {x}
        case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
            return (c.fn - {y}) | {x}
        case Inject(x, _, c) | OutType(x, _, c) | InType(x, _, c) | EmptyIn(x, c):
            return c.fn | {x}
        case CaseP(x, bs):
            return frozenset({x}).union(*(b.fn for _, b in bs))
        case EmptyOut(x):
            return frozenset((x,))
    raise TypeError(f"not a process: {p!r}")


def _size(p: Process) -> int:
    return 1 + sum(c.size for c in children(p))


PROCESS_CLASSES = (LinkP, Cut, Out, In, Inject, CaseP, Bang, Query, OutType, InType,
                   EmptyOut, EmptyIn)
for _cls in PROCESS_CLASSES:
    _cls.fn = cached_property(_fn)  # type: ignore[attr-defined]
    _cls.fn.__set_name__(_cls, "fn")
    _cls.size = cached_property(_size)  # type: ignore[attr-defined]
    _cls.size.__set_name__(_cls, "size")


def free_names(p: Process) -> frozenset[Name]:
    return p.fn


def children(p: Process) -> list[Process]:
    match p:
        case Cut(_, l, r):
            return [l, r]
        case Out(_, _, a, b):
            return [a, b]
        case In(_, _, c) | Bang(_, _, c) | Query(_, _, c) | Inject(_, _, c) | \
                OutType(_, _, c) | InType(_, _, c) | EmptyIn(_, c):
            return [c]
        case CaseP(_, bs):
            return [b for _, b in bs]
    return []


def all_names(p: Process) -> set[Name]:
    out: set[Name] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        out |= q.fn
        match q:
            case Cut(x, _, _):
                out.add(x)
            case Out(_, y, _, _) | In(_, y, _) | Bang(_, y, _) | Query(_, y, _):
                out.add(y)
        stack.extend(children(q))
    return out


def fresh_for(base: Name | str, *procs: Process, avoid: set[Name] = frozenset()) -> Name:
    """A name whose uid exceeds every uid in ``procs`` and ``avoid``."""
    if isinstance(base, Name):
        base = base.base
    top = max((n.uid for q in procs for n in all_names(q)), default=0)
    top = max([top] + [n.uid for n in avoid])
    return Name(base, top + 1)


def rename_process(p: Process, new: Name, old: Name) -> Process:
    """``p{new/old}``: replace free occurrences of ``old`` by ``new``."""
    if old == new or old not in p.fn:
        return p
    return _rename(p, old, new)


def _bind(binder: Name, body: Process, old: Name, new: Name, others: tuple = ()):
    """Rename under ``binder``; returns (binder, body) possibly alpha-renamed."""
    if binder == new:
        fresh = fresh_for(binder, body, *others, avoid={new, old})
        body = _rename(body, binder, fresh) if binder in body.fn else body
        binder = fresh
    return binder, _rename(body, old, new) if old in body.fn else body


def _rename(p: Process, old: Name, new: Name) -> Process:
    sub = lambda n: new if n == old else n  # noqa: E731
    match p:
        case LinkP(x, y):
            return LinkP(sub(x), sub(y))
        case Cut(x, l, r, ann):
            if x == old:
                return p
            if x == new:
                fresh = fresh_for(x, l, r, avoid={new, old})
                l, r = rename_process(l, fresh, x), rename_process(r, fresh, x)
                x = fresh
            return Cut(x, rename_process(l, new, old), rename_process(r, new, old), ann)
        case Out(x, y, a, b):
            if y != old:
                y, a = _bind(y, a, old, new, (b,))
            return Out(sub(x), y, a, rename_process(b, new, old))
        case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
            if y != old:
                y, c = _bind(y, c, old, new)
            return type(p)(sub(x), y, c)
        case Inject(x, l, c):
            return Inject(sub(x), l, rename_process(c, new, old))
        case OutType(x, a, c):
            return OutType(sub(x), a, rename_process(c, new, old))
        case InType(x, v, c):
            return InType(sub(x), v, rename_process(c, new, old))
        case EmptyIn(x, c):
            return EmptyIn(sub(x), rename_process(c, new, old))
        case EmptyOut(x):
            return EmptyOut(sub(x))
        case CaseP(x, bs):
            return CaseP(sub(x), tuple((l, rename_process(b, new, old)) for l, b in bs))
    raise TypeError(f"not a process: {p!r}")


def process_tyvars(p: Process) -> set[str]:
    """Free type variables of the propositions carried by ``p``."""
    match p:
        case OutType(_, a, c):
            return prop_tyvars(a) | process_tyvars(c)
        case InType(_, v, c):
            return process_tyvars(c) - {v}
        case Cut(_, l, r, ann):
            out = process_tyvars(l) | process_tyvars(r)
            return out | prop_tyvars(ann) if ann is not None else out
    return set().union(*(process_tyvars(c) for c in children(p)))


def subst_process_type(p: Process, x: str, a: Prop) -> Process:
    """``p{a/X}`` on every proposition carried by ``p``."""
    fv = prop_tyvars(a)
    match p:
        case OutType(c0, b, c):
            return OutType(c0, subst_prop(b, x, a), subst_process_type(c, x, a))
        case InType(c0, v, c):
            if v == x:
                return p
            if v in fv and x in process_tyvars(c):
                v2 = fresh_tyvar(v, fv | process_tyvars(c) | {x})
                c = subst_process_type(c, v, pvar(v2))
                v = v2
            return InType(c0, v, subst_process_type(c, x, a))
        case Cut(n, l, r, ann):
            return Cut(n, subst_process_type(l, x, a), subst_process_type(r, x, a),
                       subst_prop(ann, x, a) if ann is not None else None)
    return map_children(p, lambda q: subst_process_type(q, x, a))


def map_children(p: Process, f) -> Process:
    match p:
        case Cut(x, l, r, ann):
            return Cut(x, f(l), f(r), ann)
        case Out(x, y, a, b):
            return Out(x, y, f(a), f(b))
        case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
            return type(p)(x, y, f(c))
        case Inject(x, l, c):
            return Inject(x, l, f(c))
        case OutType(x, a, c):
            return OutType(x, a, f(c))
        case InType(x, v, c):
            return InType(x, v, f(c))
        case EmptyIn(x, c):
            return EmptyIn(x, f(c))
        case CaseP(x, bs):
            return CaseP(x, tuple((l, f(b)) for l, b in bs))
    return p


def freshen(p: Process, avoid: set[Name]) -> Process:
    """Rename every binder of ``p`` that collides with ``avoid`` or repeats inside ``p``."""
    taken = set(avoid) | set(p.fn)
    top = max((n.uid for n in taken | all_names(p)), default=0)
    counter = [top]

    def new(base: Name) -> Name:
        counter[0] += 1
        return Name(base.base, counter[0])

    def go(q: Process) -> Process:
        match q:
            case Cut(x, l, r, ann):
                if x in taken:
                    x2 = new(x)
                    l, r = rename_process(l, x2, x), rename_process(r, x2, x)
                    x = x2
                taken.add(x)
                return Cut(x, go(l), go(r), ann)
            case Out(x, y, a, b):
                if y in taken:
                    y2 = new(y)
                    a = rename_process(a, y2, y)
                    y = y2
                taken.add(y)
                return Out(x, y, go(a), go(b))
            case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
                if y in taken:
                    y2 = new(y)
                    c = rename_process(c, y2, y)
                    y = y2
                taken.add(y)
                return type(q)(x, y, go(c))
        return map_children(q, go)

    return go(p)


# alpha keys


def alpha_key(p: Process, free_token=None) -> tuple:
    """A hashable encoding identical for alpha-equivalent processes.

    Bound names become indices in binding order; cut annotations are ignored.
    """
    counter = [0]

    def tok(n: Name, env: dict) -> tuple:
        if n in env:
            return ("b", env[n])
        if free_token is not None:
            t = free_token(n)
            if t is not None:
                return t
        return ("f", n.base, n.uid)

    def bind(n: Name, env: dict) -> dict:
        counter[0] += 1
        return {**env, n: counter[0]}

    def go(q: Process, env: dict, tenv: dict) -> tuple:
        match q:
            case LinkP(x, y):
                return ("link",) + tuple(sorted((tok(x, env), tok(y, env)), key=repr))
            case Cut(x, l, r):
                env2 = bind(x, env)
                return ("cut", env2[x], go(l, env2, tenv), go(r, env2, tenv))
            case Out(x, y, a, b):
                tx = tok(x, env)
                env2 = bind(y, env)
                return ("out", tx, env2[y], go(a, env2, tenv), go(b, env, tenv))
            case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
                tx = tok(x, env)
                env2 = bind(y, env)
                return (type(q).__name__, tx, env2[y], go(c, env2, tenv))
            case Inject(x, l, c):
                return ("inj", tok(x, env), l, go(c, env, tenv))
            case CaseP(x, bs):
                tx = tok(x, env)
                return ("case", tx) + tuple((l, go(b, env, tenv)) for l, b in bs)
            case OutType(x, a, c):
                return ("outty", tok(x, env), prop_key(a, tenv), go(c, env, tenv))
            case InType(x, v, c):
                return ("inty", tok(x, env), go(c, env, {**tenv, v: len(tenv) + 1000}))
            case EmptyOut(x):
                return ("one", tok(x, env))
            case EmptyIn(x, c):
                return ("bot", tok(x, env), go(c, env, tenv))
        raise TypeError(f"not a process: {q!r}")

    return go(p, {}, {})


# printing

def show_prop(a: Prop, prec: int = 0) -> str:
    a = resolve_prop(a)
    match a:
        case PHole():
            return "_"
        case One():
            return "1"
        case Bottom():
            return "bot"
        case PVar(v):
            return str(v)
        case Tensor(l, r):
            out = f"{show_prop(l, 2)} * {show_prop(r, 2)}"
            return f"({out})" if prec > 1 else out
        case Par(l, r):
            out = f"{show_prop(l, 2)} | {show_prop(r, 2)}"
            return f"({out})" if prec > 1 else out
        case Oplus(bs):
            return "+{" + ", ".join(f"{k}: {show_prop(b)}" for k, b in bs) + "}"
        case Amp(bs):
            return "&{" + ", ".join(f"{k}: {show_prop(b)}" for k, b in bs) + "}"
        case OfCourse(b):
            return "!" + show_prop(b, 3)
        case WhyNot(b):
            return "?" + show_prop(b, 3)
        case Exists(x, b):
            out = f"ex {x}. {show_prop(b)}"
            return f"({out})" if prec > 0 else out
        case Forall(x, b):
            out = f"all {x}. {show_prop(b)}"
            return f"({out})" if prec > 0 else out
    raise TypeError(f"not a proposition: {a!r}")


def show_process(p: Process) -> str:
    match p:
        case LinkP(x, y):
            return f"{x} <-> {y}"
        case Cut(x, l, r, ann):
            ann_s = f":{show_prop(ann)}" if ann is not None else ""
            return f"new {x}{ann_s} ({show_process(l)} | {show_process(r)})"
        case Out(x, y, a, b):
            return f"{x}[{y}].({show_process(a)} | {show_process(b)})"
        case In(x, y, c):
            return f"{x}({y}). {show_process(c)}"
        case Inject(x, l, c):
            return f"{x}[{l}]. {show_process(c)}"
        case CaseP(x, bs):
            inner = "; ".join(f"{l}. {show_process(b)}" for l, b in bs)
            return f"case {x} {{ {inner} }}"
        case Bang(x, y, c):
            return f"!{x}({y}). {show_process(c)}"
        case Query(x, y, c):
            return f"?{x}[{y}]. {show_process(c)}"
        case OutType(x, a, c):
            return f"{x}[{show_prop(a)}]. {show_process(c)}"
        case InType(x, v, c):
            return f"{x}({v}). {show_process(c)}"
        case EmptyOut(x):
            return f"{x}[]"
        case EmptyIn(x, c):
            return f"{x}(). {show_process(c)}"
    raise TypeError(f"not a process: {p!r}")


for _cls in (Tensor, Par, Oplus, Amp, One, Bottom, OfCourse, WhyNot, Exists, Forall, PVar):
    _cls.__str__ = show_prop  # type: ignore[assignment]
for _cls in PROCESS_CLASSES:
    _cls.__str__ = show_process  # type: ignore[assignment]
