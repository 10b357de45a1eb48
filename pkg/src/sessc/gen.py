"""Seeded generators for session types, propositions, HGV terms and CP processes.

Terms and processes are built rule by rule, so they are well typed by
construction; each result is still re-checked, and a failed attempt is
retried with the next draw up to ``GenConfig.attempts`` times.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .cp import cp_typecheck
from .cpsyntax import (BOTTOM, ONE, Amp, Bang, Bottom, CaseP, Cut, EmptyIn, EmptyOut, Exists,
                       Forall, In, Inject, InType, LinkP, OfCourse, One, Oplus, Out, OutType,
                       Par, Process, Prop, PVar, Query, Tensor, WhyNot, dual_prop, pvar,
                       all_names, freshen, prop_eq, rename_process, show_process)
from .errors import CheckError
from .hgv import typecheck
from .names import Name, NameSupply, TypeVar
from .parser import uniquify_term
from .sessions import (END_IN, END_OUT, EndIn, EndOut, Input, InputType, LinFun, Output,
                       OutputType, Plus, Server, Service, SVar, Times, Type, UnFun, With, dual,
                       free_tyvars, is_unlimited, show_type, subst, type_eq)
from .terms import (App, Case, CoerceLin, CoerceUn, Fork, Lam, LetPair, Link, Pair, Receive,
                    ReceiveType, Request, Select, Send, SendType, Serve, Term, Var, rename_term,
                    show_term, term_names)

LABELS = ("l", "r")


@dataclass
class GenConfig:
    seed: int = 0
    max_depth: int = 4
    calculus: str = "hgv"
    target: Type | None = None
    attempts: int = 50


class GenerationError(Exception):
    pass


# types


class _Types:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def tyvar(self) -> str:
        self.counter += 1
        return f"X{self.counter}"

    def session(self, d: int, bound: tuple[str, ...] = ()) -> Type:
        r = self.rng
        if d <= 0:
            if bound and r.random() < 0.3:
                return SVar(TypeVar(r.choice(bound), r.random() < 0.5))
            return r.choice((END_OUT, END_IN))
        k = r.randrange(9)
        if k == 0:
            return Output(self.session(d - 1, bound), self.session(d - 1, bound))
        if k == 1:
            return Input(self.session(d - 1, bound), self.session(d - 1, bound))
        if k in (2, 3):
            bs = tuple((l, self.session(d - 1, bound)) for l in LABELS)
            return Plus(bs) if k == 2 else With(bs)
        if k in (4, 5):
            v = self.tyvar()
            body = self.session(d - 1, bound + (v,))
            return OutputType(v, body) if k == 4 else InputType(v, body)
        if k == 6:
            return Server(self.session(d - 1, bound))
        if k == 7:
            return Service(self.session(d - 1, bound))
        return self.session(0, bound)

    def value(self, d: int) -> Type:
        """A closed HGV type, mostly small sessions with some functions and pairs."""
        r = self.rng
        if d <= 0 or r.random() < 0.6:
            return self.session(min(d, 1))
        k = r.randrange(3)
        a, b = self.value(d - 1), self.value(d - 1)
        return (LinFun, UnFun, Times)[k](a, b)

    def prop(self, d: int, bound: tuple[str, ...] = ()) -> Prop:
        r = self.rng
        if d <= 0:
            k = r.randrange(3)
            if k == 2 and bound:
                return pvar(r.choice(bound), r.random() < 0.5)
            return ONE if k == 0 else BOTTOM
        k = r.randrange(10)
        if k == 0:
            return Tensor(self.prop(d - 1, bound), self.prop(d - 1, bound))
        if k == 1:
            return Par(self.prop(d - 1, bound), self.prop(d - 1, bound))
        if k in (2, 3):
            bs = tuple((l, self.prop(d - 1, bound)) for l in LABELS)
            return Oplus(bs) if k == 2 else Amp(bs)
        if k == 4:
            return OfCourse(self.prop(d - 1, bound))
        if k == 5:
            return WhyNot(self.prop(d - 1, bound))
        if k in (6, 7):
            v = self.tyvar()
            body = self.prop(d - 1, bound + (v,))
            return Exists(v, body) if k == 6 else Forall(v, body)
        return self.prop(0, bound)


def gen_session_type(cfg: GenConfig) -> Type:
    return _Types(random.Random(cfg.seed)).session(cfg.max_depth)


def gen_prop(cfg: GenConfig) -> Prop:
    return _Types(random.Random(cfg.seed)).prop(cfg.max_depth)


# HGV terms


class _TermGen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.types = _Types(rng)
        self.supply = NameSupply()

    def fresh(self, base: str) -> Name:
        return self.supply.fresh(base)

    def leaf(self, t: Type, wants: list) -> tuple[dict, Term]:
        matches = [w for w in wants if type_eq(w[1], t)]
        if matches and self.rng.random() < 0.9:
            w = self.rng.choice(matches)
            if not is_unlimited(t) or self.rng.random() < 0.5:
                wants.remove(w)
            return {w[0]: t}, Var(w[0])
        x = self.fresh("v")
        return {x: t}, Var(x)

    def bind(self, names: list[tuple[Name, Type]], t: Type, d: int, wants: list, un=False):
        """Generate a body of type ``t`` that consumes the linear ``names``."""
        saved = list(wants)
        inner = [w for w in wants if is_unlimited(w[1])] if un else wants
        inner.extend(names)
        ctx, m = self.term(t, d, inner)
        for n in names:
            if n in inner:
                inner.remove(n)
        ok = all(x in ctx or is_unlimited(a) for x, a in names)
        if un:
            ok = ok and all(is_unlimited(a) for x, a in ctx.items() if x not in dict(names))
        if not ok:
            wants[:] = saved
            return None
        for x, _ in names:
            ctx.pop(x, None)
        return ctx, m

    def term(self, t: Type, d: int, wants: list) -> tuple[dict, Term]:
        if d <= 0:
            return self.leaf(t, wants)
        options = ["leaf", "app", "letpair"]
        match t:
            case LinFun():
                options += ["lam", "lam", "coercelin"]
            case UnFun():
                options += ["coerceun", "coerceun"]
            case Times(_, s) if isinstance(s, (Output, Input, Plus, With, EndOut, EndIn)):
                options += ["pair", "pair", "receive"]
            case Times():
                options += ["pair", "pair"]
            case Service():
                options += ["serve", "serve", "send", "select", "case", "fork", "request"]
            case _:
                options += ["send", "select", "case", "fork", "fork", "request", "sendty",
                            "recvty"]
                if isinstance(t, EndOut):
                    options += ["link", "link"]
        for _ in range(3):
            rule = self.rng.choice(options)
            out = self.rule(rule, t, d, wants)
            if out is not None:
                return out
        return self.leaf(t, wants)

    def rule(self, rule: str, t: Type, d: int, wants: list):
        ty, go = self.types, self.term
        small = lambda: ty.value(1) if self.rng.random() < 0.3 else ty.session(1)  # noqa: E731
        match rule:
            case "leaf":
                return self.leaf(t, wants)
            case "app":
                a = small()
                c1, m1 = go(LinFun(a, t), d - 1, wants)
                c2, m2 = go(a, d - 1, wants)
                return {**c1, **c2}, App(m1, m2)
            case "letpair":
                a, b = small(), small()
                x, y = self.fresh("x"), self.fresh("y")
                body = self.bind([(x, a), (y, b)], t, d - 1, wants)
                if body is None:
                    return None
                cs, ms = go(Times(a, b), d - 1, wants)
                return {**cs, **body[0]}, LetPair(x, y, ms, body[1])
            case "lam":
                x = self.fresh("x")
                body = self.bind([(x, t.dom)], t.cod, d - 1, wants)
                if body is None:
                    return None
                return body[0], Lam(x, t.dom, body[1])
            case "coercelin":
                c, m = go(UnFun(t.dom, t.cod), d - 1, wants)
                return c, CoerceLin(m, t)
            case "coerceun":
                x = self.fresh("x")
                body = self.bind([(x, t.dom)], t.cod, d - 1, wants, un=True)
                if body is None:
                    return None
                return body[0], CoerceUn(Lam(x, t.dom, body[1]), t)
            case "pair":
                c1, m1 = go(t.left, d - 1, wants)
                c2, m2 = go(t.right, d - 1, wants)
                return {**c1, **c2}, Pair(m1, m2)
            case "receive":
                c, m = go(Input(t.left, t.right), d - 1, wants)
                return c, Receive(m)
            case "send":
                a = small()
                c1, m1 = go(a, d - 1, wants)
                c2, m2 = go(Output(a, t), d - 1, wants)
                return {**c1, **c2}, Send(m1, m2)
            case "select":
                label, other = self.rng.sample(LABELS, 2)
                bs = tuple(sorted(((label, t), (other, ty.session(1)))))
                c, m = go(Plus(bs), d - 1, wants)
                return c, Select(label, m)
            case "case":
                s = ty.session(1)
                x = self.fresh("x")
                body = self.bind([(x, s)], t, d - 1, wants)
                if body is None:
                    return None
                y = self.fresh("y")
                other = uniquify_term(rename_term(body[1], y, x), term_names(body[1]))
                c, m = go(With(tuple((l, s) for l in LABELS)), d - 1, wants)
                return {**c, **body[0]}, Case(m, ((LABELS[0], x, body[1]), (LABELS[1], y, other)))
            case "fork":
                x = self.fresh("c")
                body = self.bind([(x, dual(t))], END_OUT, d - 1, wants)
                if body is None:
                    return None
                return body[0], Fork(x, body[1], dual(t))
            case "link":
                s = ty.session(1)
                c1, m1 = go(s, d - 1, wants)
                c2, m2 = go(dual(s), d - 1, wants)
                return {**c1, **c2}, Link(m1, m2)
            case "request":
                c, m = go(Service(t), d - 1, wants)
                return c, Request(m)
            case "serve":
                x = self.fresh("s")
                body = self.bind([(x, dual(t.body))], END_OUT, d - 1, wants, un=True)
                if body is None:
                    return None
                return body[0], Serve(x, body[1], dual(t.body))
            case "sendty":
                v = ty.tyvar()
                b = self.rng.choice((END_OUT, END_IN))
                body = _abstract(t, b, v)
                c, m = go(OutputType(v, body), d - 1, wants)
                return c, SendType(b, m)
            case "recvty":
                # X stays out of t: the CP image of recvty X. M is only typable then
                v = ty.tyvar()
                c, m = go(InputType(v, t), d - 1, wants)
                return c, ReceiveType(v, m)
        return None


def _abstract(t: Type, b: Type, v: str) -> Type:
    """Replace occurrences of the closed session ``b`` in ``t`` by ``v``."""
    if t == b:
        return SVar(TypeVar(v))
    match t:
        case Output(p, c):
            return Output(_abstract(p, b, v), _abstract(c, b, v))
        case Input(p, c):
            return Input(_abstract(p, b, v), _abstract(c, b, v))
        case Plus(bs):
            return Plus(tuple((l, _abstract(s, b, v)) for l, s in bs))
        case With(bs):
            return With(tuple((l, _abstract(s, b, v)) for l, s in bs))
        case Server(s):
            return Server(_abstract(s, b, v))
        case Service(s):
            return Service(_abstract(s, b, v))
    return t


def gen_typed_term(cfg: GenConfig) -> tuple[dict[Name, Type], Term, Type]:
    """A well-typed HGV term of depth at most ``cfg.max_depth``: (context, term, type)."""
    rng = random.Random(cfg.seed)
    last = None
    for _ in range(cfg.attempts):
        g = _TermGen(rng)
        t = cfg.target if cfg.target is not None else g.types.value(2)
        ctx, m = g.term(t, cfg.max_depth, [])
        try:
            got, _ = typecheck(ctx, m, t)
        except CheckError as err:
            last = f"{show_term(m)}: {err}"
            continue
        if type_eq(got, t):
            return ctx, m, t
        last = f"{show_term(m)}: {show_type(got)} is not {show_type(t)}"
    raise GenerationError(f"no well-typed term after {cfg.attempts} attempts; last: {last}")


# CP processes


class _ProcGen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.types = _Types(rng)
        self.supply = NameSupply()

    def fresh(self, base: str = "x") -> Name:
        return self.supply.fresh(base)

    def proc(self, d: int) -> tuple[dict[Name, Prop], Process]:
        r = self.rng
        if d <= 0:
            return self.axiom()
        k = r.choice(("ax", "one", "bot", "tensor", "par", "plus", "with", "cut", "cut", "cut",
                      "bang", "query", "weaken", "contract", "ex", "all"))
        match k:
            case "ax":
                return self.axiom()
            case "one":
                x = self.fresh()
                return {x: ONE}, EmptyOut(x)
            case "bot":
                ctx, p = self.proc(d - 1)
                x = self.fresh()
                return {**ctx, x: BOTTOM}, EmptyIn(x, p)
            case "tensor":
                c1, p = self.proc(d - 1)
                c2, q = self.proc(d - 1)
                y, x = r.choice(sorted(c1)), r.choice(sorted(c2))
                a, b = c1.pop(y), c2.pop(x)
                return {**c1, **c2, x: Tensor(a, b)}, Out(x, y, p, q)
            case "par":
                ctx, p = self.proc(d - 1)
                if len(ctx) < 2:
                    return ctx, p
                y, x = r.sample(sorted(ctx), 2)
                a, b = ctx.pop(y), ctx.pop(x)
                return {**ctx, x: Par(a, b)}, In(x, y, p)
            case "plus":
                ctx, p = self.proc(d - 1)
                x = r.choice(sorted(ctx))
                label, other = r.sample(LABELS, 2)
                bs = tuple(sorted(((label, ctx[x]), (other, self.types.prop(1)))))
                return {**ctx, x: Oplus(bs)}, Inject(x, label, p)
            case "with":
                ctx, p = self.proc(d - 1)
                x = r.choice(sorted(ctx))
                q = _refresh(p, self.supply)
                return ({**ctx, x: Amp(tuple((l, ctx[x]) for l in LABELS))},
                        CaseP(x, ((LABELS[0], p), (LABELS[1], q))))
            case "cut":
                return self.cut(d)
            case "bang":
                ctx, p = self.proc(d - 1)
                y = r.choice(sorted(ctx))
                for n in sorted(ctx):
                    if n != y and not isinstance(ctx[n], WhyNot):
                        n2 = self.fresh(n.base)
                        p = Query(n2, n, p)
                        ctx[n2] = WhyNot(ctx.pop(n))
                x = self.fresh()
                a = ctx.pop(y)
                return {**ctx, x: OfCourse(a)}, Bang(x, y, p)
            case "query":
                ctx, p = self.proc(d - 1)
                y = r.choice(sorted(ctx))
                x = self.fresh()
                return {**ctx, x: WhyNot(ctx.pop(y))}, Query(x, y, p)
            case "weaken":
                ctx, p = self.proc(d - 1)
                return {**ctx, self.fresh("w"): WhyNot(self.types.prop(1))}, p
            case "contract":
                # two derelictions of one ?bot channel, each closed by a wait
                ctx, p = self.proc(d - 1)
                x, y1, y2 = self.fresh(), self.fresh("y"), self.fresh("y")
                p = Query(x, y1, Query(x, y2, EmptyIn(y1, EmptyIn(y2, p))))
                return {**ctx, x: WhyNot(BOTTOM)}, p
            case "ex":
                ctx, p = self.proc(d - 1)
                x = r.choice(sorted(ctx))
                a = ctx[x]
                v = self.types.tyvar()
                if r.random() < 0.5:
                    return {**ctx, x: Exists(v, pvar(v))}, OutType(x, a, p)
                return {**ctx, x: Exists(v, a)}, OutType(x, a, p)
            case "all":
                ctx, p = self.proc(d - 1)
                x = r.choice(sorted(ctx))
                v = self.types.tyvar()
                return {**ctx, x: Forall(v, ctx[x])}, InType(x, v, p)
        raise AssertionError(k)

    def axiom(self) -> tuple[dict[Name, Prop], Process]:
        a = self.types.prop(self.rng.randrange(3))
        x, y = self.fresh(), self.fresh()
        return {x: a, y: dual_prop(a)}, LinkP(x, y)

    def cut(self, d: int) -> tuple[dict[Name, Prop], Process]:
        r = self.rng
        c1, p = self.proc(d - 1)
        x = r.choice(sorted(c1))
        a = c1.pop(x)
        want = dual_prop(a)
        for _ in range(4):
            c2, q = self.proc(d - 1)
            hits = sorted(y for y, b in c2.items() if prop_eq(b, want))
            if hits:
                y = r.choice(hits)
                c2.pop(y)
                return {**c1, **c2}, Cut(x, p, rename_process(q, x, y), a)
        # fall back to the identity expansion at the dual type
        w = self.fresh()
        q = eta(want, x, w, self.supply)
        return {**c1, w: a}, Cut(x, p, q, a)


def _refresh(p: Process, supply: NameSupply) -> Process:
    q = freshen(p, all_names(p))
    supply.bump(*all_names(q))
    return q


def eta(a: Prop, x: Name, y: Name, supply: NameSupply) -> Process:
    """The identity expansion: a link-free proof of ``x: a, y: dual a``."""
    match a:
        case One():
            return EmptyIn(y, EmptyOut(x))
        case Bottom():
            return EmptyIn(x, EmptyOut(y))
        case Tensor(l, r):
            u, v = supply.fresh("u"), supply.fresh("v")
            return In(y, v, Out(x, u, eta(l, u, v, supply), eta(r, x, y, supply)))
        case Par(l, r):
            return eta_dual(a, x, y, supply)
        case Oplus(bs):
            return CaseP(y, tuple((l, Inject(x, l, eta(b, x, y, supply))) for l, b in bs))
        case Amp(bs):
            return eta_dual(a, x, y, supply)
        case OfCourse(b):
            u, v = supply.fresh("u"), supply.fresh("v")
            return Bang(x, u, Query(y, v, eta(b, u, v, supply)))
        case WhyNot(b):
            return eta_dual(a, x, y, supply)
        case Exists(var, b):
            return InType(y, var, OutType(x, pvar(var), eta(b, x, y, supply)))
        case Forall():
            return eta_dual(a, x, y, supply)
    return LinkP(x, y)


def eta_dual(a: Prop, x: Name, y: Name, supply: NameSupply) -> Process:
    return eta(dual_prop(a), y, x, supply)


def gen_typed_process(cfg: GenConfig) -> tuple[dict[Name, Prop], Process]:
    """A well-typed CP process of depth at most ``cfg.max_depth``."""
    rng = random.Random(cfg.seed)
    last = None
    for _ in range(cfg.attempts):
        ctx, p = _ProcGen(rng).proc(cfg.max_depth)
        try:
            cp_typecheck(ctx, p)
        except CheckError as err:
            last = f"{show_process(p)}: {err}"
            continue
        return ctx, p
    raise GenerationError(f"no well-typed process after {cfg.attempts} attempts; last: {last}")
