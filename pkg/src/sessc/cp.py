"""Typechecking CP processes with explicit derivations.

A ?-typed name may be used any number of times: unused ones are weakened
and shared ones contracted (the right-hand occurrence is renamed). Cut
binders without an annotation get a hole that the left premise solves.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import errors as E
from .cpsyntax import (BOTTOM, ONE, Amp, Bang, Bottom, CaseP, Cut, EmptyIn, EmptyOut, Exists,
                       Forall, In, Inject, InType, LinkP, OfCourse, One, Oplus, Out, OutType,
                       Par, PHole, PMeta, Process, Prop, PVar, Query, Tensor, WhyNot,
                       all_names, dual_prop, prop_eq, prop_tyvars, rename_process,
                       resolve_prop, show_prop, subst_prop, pvar)
from .names import Name, NameSupply, fresh_tyvar

CP_RULES = ("Ax", "Cut", "*", "|", "+", "&", "!", "?", "Weaken", "Contract", "ex", "all",
            "1", "bot")


@dataclass
class CPDerivation:
    rule: str
    ctx: dict[Name, Prop]
    proc: Process
    children: list["CPDerivation"] = field(default_factory=list)
    var: Name | None = None       # the name a Weaken/Contract node acts on
    fresh: Name | None = None     # x' introduced by Contract
    cut_type: Prop | None = None  # type of the cut name in the left premise

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def rules(self) -> set[str]:
        return {d.rule for d in self.walk()}

    def pretty(self, indent: int = 0) -> str:
        ctx = ", ".join(f"{x}: {show_prop(a)}" for x, a in self.ctx.items())
        extra = f" [{self.var}" + (f"->{self.fresh}]" if self.fresh else "]") if self.var else ""
        line = " " * indent + f"{self.rule}{extra}: {self.proc} |- {ctx}"
        return "\n".join([line] + [c.pretty(indent + 2) for c in self.children])


# holes


def zonk_prop(a: Prop, ground: bool = False) -> Prop:
    """Substitute solved holes; with ``ground``, default unsolved ones to 1."""
    a = resolve_prop(a)
    z = lambda b: zonk_prop(b, ground)  # noqa: E731
    match a:
        case PHole(m, d):
            if ground:
                m.solution = ONE
                return BOTTOM if d else ONE
            return a
        case Tensor(l, r):
            return Tensor(z(l), z(r))
        case Par(l, r):
            return Par(z(l), z(r))
        case Oplus(bs):
            return Oplus(tuple((k, z(b)) for k, b in bs))
        case Amp(bs):
            return Amp(tuple((k, z(b)) for k, b in bs))
        case OfCourse(b):
            return OfCourse(z(b))
        case WhyNot(b):
            return WhyNot(z(b))
        case Exists(x, b):
            return Exists(x, z(b))
        case Forall(x, b):
            return Forall(x, z(b))
    return a


def _occurs(m: PMeta, a: Prop) -> bool:
    a = resolve_prop(a)
    match a:
        case PHole(m2, _):
            return m2 is m
        case Tensor(l, r) | Par(l, r):
            return _occurs(m, l) or _occurs(m, r)
        case Oplus(bs) | Amp(bs):
            return any(_occurs(m, b) for _, b in bs)
        case OfCourse(b) | WhyNot(b) | Exists(_, b) | Forall(_, b):
            return _occurs(m, b)
    return False


def _show(a: Prop) -> str:
    return show_prop(zonk_prop(a)) if not isinstance(resolve_prop(a), PHole) else "_"


def punify(a: Prop, b: Prop) -> None:
    a, b = resolve_prop(a), resolve_prop(b)
    if isinstance(a, PHole) and isinstance(b, PHole) and a.meta is b.meta:
        if a.dual == b.dual:
            return
        raise E.Mismatch("a proposition cannot equal its own dual")
    if isinstance(a, PHole) or isinstance(b, PHole):
        h, t = (a, b) if isinstance(a, PHole) else (b, a)
        if _occurs(h.meta, t):
            raise E.Mismatch(f"cyclic proposition {_show(t)}")
        h.meta.solution = dual_prop(t) if h.dual else t
        return
    fail = E.Mismatch(f"expected {_show(a)}, got {_show(b)}")
    if type(a) is not type(b):
        raise fail
    match a:
        case Tensor(l, r) | Par(l, r):
            punify(l, b.left)
            punify(r, b.right)
        case Oplus(bs) | Amp(bs):
            if sorted(k for k, _ in bs) != sorted(k for k, _ in b.branches):
                raise E.BranchMismatch(f"labels {sorted(k for k, _ in bs)} vs "
                                       f"{sorted(k for k, _ in b.branches)}")
            other = dict(b.branches)
            for k, x in bs:
                punify(x, other[k])
        case OfCourse(x) | WhyNot(x):
            punify(x, b.body)
        case Exists(v, x) | Forall(v, x):
            if v != b.var:
                avoid = prop_tyvars(x, True) | prop_tyvars(b.body, True)
                fresh = fresh_tyvar(v, avoid)
                x = subst_prop(x, v, pvar(fresh))
                punify(x, subst_prop(b.body, b.var, pvar(fresh)))
            else:
                punify(x, b.body)
        case PVar(v):
            if v != b.var:
                raise fail
        case One() | Bottom():
            pass


# checking


class _Checker:
    def __init__(self, supply: NameSupply):
        self.supply = supply
        self.metas = itertools.count()

    def hole(self) -> PHole:
        return PHole(PMeta(next(self.metas)))

    def shape(self, a: Prop, make, what: str, x: Name) -> Prop:
        """Match ``a`` against a connective; holes are solved with ``make``."""
        r = resolve_prop(a)
        if isinstance(r, PHole):
            if make is None:
                raise E.CannotInfer(f"cannot infer the type of {x} from {what}; annotate the cut")
            punify(r, make())
            r = resolve_prop(a)
        return r

    def whynot(self, a: Prop, err: E.CheckError) -> None:
        r = resolve_prop(a)
        if isinstance(r, PHole):
            punify(r, WhyNot(self.hole()))
        elif not isinstance(r, WhyNot):
            raise err

    def derive(self, ctx: dict[Name, Prop], p: Process) -> CPDerivation:
        missing = sorted(x for x in p.fn if x not in ctx)
        if missing:
            raise E.Unbound(f"unbound name {missing[0]}")
        inner = {x: a for x, a in ctx.items() if x in p.fn}
        d = self.rule(inner, p)
        for x, a in reversed(list(ctx.items())):
            if x in p.fn:
                continue
            self.whynot(a, E.LinearUnused(f"name {x} of type {_show(a)} is never used"))
            d = CPDerivation("Weaken", {**d.ctx, x: a}, p, [d], var=x)
        return d

    def split(self, ctx, left_names, right: Process):
        """Share out ``ctx``; names wanted on both sides are contracted.

        Returns (left ctx, right ctx, renamed right process, renames).
        """
        renames = []
        for x in ctx:
            if x in left_names and x in right.fn:
                self.whynot(ctx[x], E.LinearReused(f"name {x} is used more than once"))
                x2 = self.supply.fresh(x)
                right = rename_process(right, x2, x)
                renames.append((x, x2))
        c1 = {x: a for x, a in ctx.items() if x in left_names}
        c2 = {x: a for x, a in ctx.items() if x in right.fn}
        for x, x2 in renames:
            c2[x2] = ctx[x]
        return c1, c2, right, renames

    def contract(self, node: CPDerivation, renames) -> CPDerivation:
        for x, x2 in reversed(renames):
            ctx = {k: v for k, v in node.ctx.items() if k != x2}
            node = CPDerivation("Contract", ctx, rename_process(node.proc, x, x2), [node],
                                var=x, fresh=x2)
        return node

    def rule(self, ctx: dict[Name, Prop], p: Process) -> CPDerivation:
        match p:
            case LinkP(x, y):
                if x == y:
                    raise E.LinearReused(f"name {x} is linked to itself")
                a, b = ctx[x], ctx[y]
                try:
                    punify(a, dual_prop(b))
                except E.CheckError:
                    raise E.NotDual(f"{x}: {_show(a)} and {y}: {_show(b)} are not dual") from None
                return CPDerivation("Ax", dict(ctx), p)

            case Cut(x, l, r, ann):
                if x in ctx:
                    raise E.LinearReused(f"cut binder {x} shadows a free name")
                a = ann if ann is not None else self.hole()
                rest = {k: v for k, v in ctx.items() if k != x}
                c1, c2, r2, renames = self.split(rest, l.fn - {x}, r)
                d1 = self.derive({**c1, x: a}, l)
                try:
                    d2 = self.derive({**c2, x: dual_prop(a)}, r2)
                except E.Mismatch as err:
                    if x in r2.fn:
                        raise E.NotDual(f"cut on {x}: {err.message}") from None
                    raise
                node = CPDerivation("Cut", {**c1, **c2}, Cut(x, l, r2, ann), [d1, d2],
                                    cut_type=a)
                return self.contract(node, renames)

            case Out(x, y, pl, cont):
                if x in pl.fn:
                    raise E.LinearReused(f"name {x} is used in the payload of its own output")
                t = self.shape(ctx[x], lambda: Tensor(self.hole(), self.hole()), "an output", x)
                if not isinstance(t, Tensor):
                    raise E.Mismatch(f"{x}: expected a tensor, got {_show(t)}")
                rest = {k: v for k, v in ctx.items() if k != x}
                c1, c2, cont2, renames = self.split(rest, pl.fn - {y}, cont)
                d1 = self.derive({**c1, y: t.left}, pl)
                d2 = self.derive({**c2, x: t.right}, cont2)
                node = CPDerivation("*", {**c1, **c2, x: t}, Out(x, y, pl, cont2), [d1, d2])
                return self.contract(node, renames)

            case In(x, y, c):
                t = self.shape(ctx[x], lambda: Par(self.hole(), self.hole()), "an input", x)
                if not isinstance(t, Par):
                    raise E.Mismatch(f"{x}: expected a par, got {_show(t)}")
                rest = {k: v for k, v in ctx.items() if k != x}
                d = self.derive({**rest, y: t.left, x: t.right}, c)
                return CPDerivation("|", dict(ctx), p, [d])

            case Inject(x, label, c):
                t = self.shape(ctx[x], None, "a selection", x)
                if not isinstance(t, Oplus):
                    raise E.Mismatch(f"{x}: expected a choice, got {_show(t)}")
                bs = dict(t.branches)
                if label not in bs:
                    raise E.BranchMismatch(f"label {label} not in {sorted(bs)}")
                rest = {k: v for k, v in ctx.items() if k != x}
                d = self.derive({**rest, x: bs[label]}, c)
                return CPDerivation("+", dict(ctx), p, [d])

            case CaseP(x, bs):
                labels = [k for k, _ in bs]
                if len(set(labels)) != len(labels):
                    raise E.BranchMismatch(f"duplicate labels {labels}")
                t = self.shape(ctx[x], lambda: Amp(tuple((k, self.hole()) for k in labels)),
                               "a case", x)
                if not isinstance(t, Amp):
                    raise E.Mismatch(f"{x}: expected an offer, got {_show(t)}")
                if sorted(labels) != sorted(k for k, _ in t.branches):
                    raise E.BranchMismatch(f"case offers {sorted(labels)}, type has "
                                           f"{sorted(k for k, _ in t.branches)}")
                types = dict(t.branches)
                rest = {k: v for k, v in ctx.items() if k != x}
                kids = [self.derive({**rest, x: types[k]}, b) for k, b in bs]
                return CPDerivation("&", dict(ctx), p, kids)

            case Bang(x, y, c):
                t = self.shape(ctx[x], lambda: OfCourse(self.hole()), "a server", x)
                if not isinstance(t, OfCourse):
                    raise E.Mismatch(f"{x}: expected !A, got {_show(t)}")
                rest = {k: v for k, v in ctx.items() if k != x}
                if x in c.fn:
                    raise E.LinearReused(f"server {x} is used inside its own body")
                for k, v in rest.items():
                    self.whynot(v, E.UnlimitedViolation(
                        f"server {x} captures {k} of non-? type {_show(v)}"))
                d = self.derive({**rest, y: t.body}, c)
                return CPDerivation("!", dict(ctx), p, [d])

            case Query(x, y, c):
                t = self.shape(ctx[x], lambda: WhyNot(self.hole()), "a client", x)
                if not isinstance(t, WhyNot):
                    raise E.Mismatch(f"{x}: expected ?A, got {_show(t)}")
                if x in c.fn:
                    # x is still wanted after this use: contract first
                    x2 = self.supply.fresh(x)
                    node = self.rule({**ctx, x2: t}, Query(x, y, rename_process(c, x2, x)))
                    return self.contract(node, [(x, x2)])
                rest = {k: v for k, v in ctx.items() if k != x}
                d = self.derive({**rest, y: t.body}, c)
                return CPDerivation("?", dict(ctx), p, [d])

            case OutType(x, a, c):
                t = self.shape(ctx[x], None, "a type output", x)
                if not isinstance(t, Exists):
                    raise E.Mismatch(f"{x}: expected an existential, got {_show(t)}")
                rest = {k: v for k, v in ctx.items() if k != x}
                d = self.derive({**rest, x: subst_prop(t.body, t.var, a)}, c)
                return CPDerivation("ex", dict(ctx), p, [d])

            case InType(x, v, c):
                t = self.shape(ctx[x], lambda: Forall(v, self.hole()), "a type input", x)
                if not isinstance(t, Forall):
                    raise E.Mismatch(f"{x}: expected a universal, got {_show(t)}")
                rest = {k: w for k, w in ctx.items() if k != x}
                for k, w in rest.items():
                    if v in prop_tyvars(zonk_prop(w)):
                        raise E.Mismatch(f"type variable {v} escapes through {k}")
                body = t.body if t.var == v else subst_prop(t.body, t.var, pvar(v))
                d = self.derive({**rest, x: body}, c)
                return CPDerivation("all", dict(ctx), p, [d])

            case EmptyOut(x):
                t = self.shape(ctx[x], lambda: ONE, "x[]", x)
                if not isinstance(t, One):
                    raise E.Mismatch(f"{x}: expected 1, got {_show(t)}")
                return CPDerivation("1", dict(ctx), p)

            case EmptyIn(x, c):
                t = self.shape(ctx[x], lambda: BOTTOM, "x()", x)
                if not isinstance(t, Bottom):
                    raise E.Mismatch(f"{x}: expected bot, got {_show(t)}")
                if x in c.fn:
                    raise E.LinearReused(f"name {x} is used after closing")
                rest = {k: v for k, v in ctx.items() if k != x}
                d = self.derive(rest, c)
                return CPDerivation("bot", dict(ctx), p, [d])
        raise TypeError(f"not a process: {p!r}")


def _ground(d: CPDerivation) -> CPDerivation:
    d.ctx = {x: zonk_prop(a, True) for x, a in d.ctx.items()}
    if d.cut_type is not None:
        d.cut_type = zonk_prop(d.cut_type, True)
    for c in d.children:
        _ground(c)
    return d


def supply_for(*procs: Process, ctx=()) -> NameSupply:
    top = max((n.uid for p in procs for n in all_names(p)), default=0)
    top = max([top] + [n.uid for n in ctx])
    return NameSupply(top + 1)


def cp_typecheck(ctx: dict[Name, Prop], p: Process,
                 supply: NameSupply | None = None) -> CPDerivation:
    """Derive ``p |- ctx``; raises a CheckError subclass on failure."""
    checker = _Checker(supply or supply_for(p, ctx=ctx))
    d = checker.derive(dict(ctx), p)
    return _ground(d)


def annotate(d: CPDerivation) -> Process:
    """The checked process with every cut annotated by its inferred type."""
    match d.proc:
        case _ if d.rule in ("Weaken", "Contract"):
            return annotate(d.children[0]) if d.rule == "Weaken" else \
                rename_process(annotate(d.children[0]), d.var, d.fresh)
    p = d.proc
    kids = [annotate(c) for c in d.children]
    match p:
        case Cut(x, _, _):
            return Cut(x, kids[0], kids[1], d.cut_type)
        case Out(x, y, _, _):
            return Out(x, y, kids[0], kids[1])
        case In(x, y, _) | Bang(x, y, _) | Query(x, y, _):
            return type(p)(x, y, kids[0])
        case Inject(x, l, _):
            return Inject(x, l, kids[0])
        case CaseP(x, bs):
            return CaseP(x, tuple((l, k) for (l, _), k in zip(bs, kids)))
        case OutType(x, a, _):
            return OutType(x, a, kids[0])
        case InType(x, v, _):
            return InType(x, v, kids[0])
        case EmptyIn(x, _):
            return EmptyIn(x, kids[0])
    return p


# local re-checking of derivations


def _same_ctx(a: dict[Name, Prop], b: dict[Name, Prop]) -> bool:
    return a.keys() == b.keys() and all(prop_eq(a[k], b[k]) for k in a)


def _without(ctx: dict, *names: Name) -> dict:
    return {k: v for k, v in ctx.items() if k not in names}


def _node_ok(d: CPDerivation) -> bool:
    p, ctx, kids = d.proc, d.ctx, d.children
    if d.rule == "Weaken":
        return (len(kids) == 1 and d.var in ctx and isinstance(ctx[d.var], WhyNot)
                and kids[0].proc == p and _same_ctx(kids[0].ctx, _without(ctx, d.var)))
    if d.rule == "Contract":
        if len(kids) != 1 or d.var not in ctx or not isinstance(ctx[d.var], WhyNot):
            return False
        k = kids[0]
        want = {**_without(ctx, d.var), d.var: ctx[d.var], d.fresh: ctx[d.var]}
        return (d.fresh not in ctx and _same_ctx(k.ctx, want)
                and rename_process(k.proc, d.var, d.fresh) == p)
    match p:
        case LinkP(x, y):
            return (d.rule == "Ax" and not kids and ctx.keys() == {x, y}
                    and prop_eq(ctx[x], dual_prop(ctx[y])))
        case Cut(x, l, r):
            if d.rule != "Cut" or len(kids) != 2 or kids[0].proc != l or kids[1].proc != r:
                return False
            k1, k2 = kids[0].ctx, kids[1].ctx
            if x not in k1 or x not in k2 or not prop_eq(k1[x], dual_prop(k2[x])):
                return False
            g, h = _without(k1, x), _without(k2, x)
            return not (g.keys() & h.keys()) and _same_ctx({**g, **h}, ctx)
        case Out(x, y, pl, cont):
            if d.rule != "*" or len(kids) != 2 or kids[0].proc != pl or kids[1].proc != cont:
                return False
            k1, k2 = kids[0].ctx, kids[1].ctx
            t = ctx.get(x)
            if not isinstance(t, Tensor) or y not in k1 or x not in k2:
                return False
            g, h = _without(k1, y), _without(k2, x)
            return (prop_eq(k1[y], t.left) and prop_eq(k2[x], t.right)
                    and not (g.keys() & h.keys()) and _same_ctx({**g, **h, x: t}, ctx))
        case In(x, y, c):
            t = ctx.get(x)
            return (d.rule == "|" and len(kids) == 1 and kids[0].proc == c
                    and isinstance(t, Par) and y not in ctx
                    and _same_ctx(kids[0].ctx, {**_without(ctx, x), y: t.left, x: t.right}))
        case Inject(x, label, c):
            t = ctx.get(x)
            if d.rule != "+" or len(kids) != 1 or kids[0].proc != c or not isinstance(t, Oplus):
                return False
            bs = dict(t.branches)
            return label in bs and _same_ctx(kids[0].ctx, {**_without(ctx, x), x: bs[label]})
        case CaseP(x, bs):
            t = ctx.get(x)
            if d.rule != "&" or not isinstance(t, Amp) or len(kids) != len(bs):
                return False
            types = dict(t.branches)
            if sorted(types) != sorted(k for k, _ in bs):
                return False
            return all(k.proc == b and _same_ctx(k.ctx, {**_without(ctx, x), x: types[l]})
                       for (l, b), k in zip(bs, kids))
        case Bang(x, y, c):
            t = ctx.get(x)
            rest = _without(ctx, x)
            return (d.rule == "!" and len(kids) == 1 and kids[0].proc == c
                    and isinstance(t, OfCourse) and y not in ctx
                    and all(isinstance(v, WhyNot) for v in rest.values())
                    and _same_ctx(kids[0].ctx, {**rest, y: t.body}))
        case Query(x, y, c):
            t = ctx.get(x)
            return (d.rule == "?" and len(kids) == 1 and kids[0].proc == c
                    and isinstance(t, WhyNot) and y not in ctx
                    and _same_ctx(kids[0].ctx, {**_without(ctx, x), y: t.body}))
        case OutType(x, a, c):
            t = ctx.get(x)
            return (d.rule == "ex" and len(kids) == 1 and kids[0].proc == c
                    and isinstance(t, Exists)
                    and _same_ctx(kids[0].ctx,
                                  {**_without(ctx, x), x: subst_prop(t.body, t.var, a)}))
        case InType(x, v, c):
            t = ctx.get(x)
            if d.rule != "all" or len(kids) != 1 or kids[0].proc != c \
                    or not isinstance(t, Forall):
                return False
            rest = _without(ctx, x)
            if any(v in prop_tyvars(w) for w in rest.values()):
                return False
            body = t.body if t.var == v else subst_prop(t.body, t.var, pvar(v))
            return _same_ctx(kids[0].ctx, {**rest, x: body})
        case EmptyOut(x):
            return d.rule == "1" and not kids and ctx.keys() == {x} \
                and isinstance(ctx[x], One)
        case EmptyIn(x, c):
            return (d.rule == "bot" and len(kids) == 1 and kids[0].proc == c
                    and isinstance(ctx.get(x), Bottom)
                    and _same_ctx(kids[0].ctx, _without(ctx, x)))
    return False


def check_sequent_eq(d: CPDerivation) -> bool:
    """Every node's conclusion follows from its premises by its rule."""
    return all(_node_ok(n) for n in d.walk())
