"""Algorithmic typechecking for HGV with explicit derivations.

Context splits follow free variables: a linear name goes to the one
premise that mentions it; an unlimited name mentioned by both premises is
contracted (the right-hand occurrence is renamed to a fresh ``x'``), and an
unlimited name mentioned by neither is weakened where its scope ends.
Binder types that are not annotated are solved by unification.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import errors as E
from .names import Name, NameSupply
from .names import TypeVar, fresh_tyvar
from .sessions import (END_IN, END_OUT, Hole, Input, InputType, LinFun, Meta, NotASession,
                       Output, OutputType, Plus, Server, Service, SVar, Times, Type, UnFun,
                       With, all_tyvars, dual, free_tyvars, is_session, is_unlimited,
                       resolve, show_type, subst, zonk)
from .terms import (App, Case, CoerceLin, CoerceUn, Connect, Discard, Fork, Lam, Let, LetPair,
                    Link, Pair, Receive, ReceiveType, Request, Select, Send, SendType,
                    Serve, Term, Var, rename_term, term_names, subterms)

RULES = ("Id", "Weaken", "Contract", "-o-I", "-o-E", "->-I", "->-E", "*-I", "*-E",
         "Send", "Receive", "Select", "Case", "Fork", "Link", "SendType", "ReceiveType",
         "Serve", "Request")


@dataclass
class Derivation:
    rule: str
    ctx: dict[Name, Type]
    term: Term
    type: Type
    children: list["Derivation"] = field(default_factory=list)
    var: Name | None = None       # the name a Weaken/Contract node acts on
    fresh: Name | None = None     # x' introduced by Contract

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def rules(self) -> set[str]:
        return {d.rule for d in self.walk()}

    def pretty(self, indent: int = 0) -> str:
        ctx = ", ".join(f"{x}: {show_type(t)}" for x, t in self.ctx.items())
        extra = f" [{self.var}" + (f"->{self.fresh}]" if self.fresh else "]") if self.var else ""
        line = " " * indent + f"{self.rule}{extra}: {ctx} |- {self.term} : {show_type(self.type)}"
        return "\n".join([line] + [c.pretty(indent + 2) for c in self.children])


def _occurs(m: Meta, t: Type) -> bool:
    t = resolve(t)
    match t:
        case Hole(m2, _):
            return m2 is m
        case Output(p, c) | Input(p, c) | LinFun(p, c) | UnFun(p, c) | Times(p, c):
            return _occurs(m, p) or _occurs(m, c)
        case Plus(bs) | With(bs):
            return any(_occurs(m, b) for _, b in bs)
        case OutputType(_, c) | InputType(_, c) | Server(c) | Service(c):
            return _occurs(m, c)
    return False


def unify(a: Type, b: Type) -> None:
    """Make ``a`` and ``b`` equal by solving holes; raises Mismatch."""
    a, b = resolve(a), resolve(b)
    if a == b:
        return
    if isinstance(a, Hole):
        return _solve(a, b)
    if isinstance(b, Hole):
        return _solve(b, a)
    fail = E.Mismatch(f"expected {show_type(zonk(a))}, got {show_type(zonk(b))}")
    if type(a) is not type(b):
        raise fail
    match a:
        case Output() | Input():
            unify(a.payload, b.payload)
            unify(a.cont, b.cont)
        case LinFun() | UnFun():
            unify(a.dom, b.dom)
            unify(a.cod, b.cod)
        case Times():
            unify(a.left, b.left)
            unify(a.right, b.right)
        case Plus() | With():
            la, lb = dict(a.branches), dict(b.branches)
            if set(la) != set(lb) or len(la) != len(a.branches) or len(lb) != len(b.branches):
                raise E.BranchMismatch(f"labels {sorted(la)} vs {sorted(lb)}")
            for k in la:
                unify(la[k], lb[k])
        case Server() | Service():
            unify(a.body, b.body)
        case OutputType() | InputType():
            v = fresh_tyvar("X", all_tyvars(a) | all_tyvars(b))
            unify(subst(a.cont, a.var, SVar_(v)), subst(b.cont, b.var, SVar_(v)))
        case _:
            raise fail


def SVar_(ident: str) -> SVar:
    return SVar(TypeVar(ident))


def _solve(h: Hole, t: Type) -> None:
    if _occurs(h.meta, t):
        raise E.Mismatch(f"cyclic type {show_type(zonk(t))}")
    if h.dual or h.meta.session_only:
        if not is_session(t):
            raise E.NotSession(f"{show_type(zonk(t))} is not a session type")
    h.meta.solution = dual(t) if h.dual else t


def fresh_hole(session: bool = False) -> Hole:
    m = Meta()
    m.session_only = session
    return Hole(m)


class _Checker:
    def __init__(self, supply: NameSupply):
        self.supply = supply
        # deferred un(T) obligations: (type, error to raise)
        self.pending: list[tuple[Type, E.CheckError]] = []

    # structural plumbing

    def require_un(self, t: Type, err: E.CheckError) -> None:
        r = resolve(t)
        if isinstance(r, Hole):
            self.pending.append((t, err))
        elif not is_unlimited(r):
            raise err

    def flush(self) -> None:
        for t, err in self.pending:
            r = resolve(t)
            if isinstance(r, Hole) and isinstance(err, E.LinearUnused):
                # a discarded binder of unknown type: end? is the simplest unlimited type
                r.meta.solution = END_OUT if r.dual else END_IN
                continue
            # a duplicated binder of unknown type is treated as linear
            if isinstance(r, Hole) or not is_unlimited(r):
                raise err
        self.pending.clear()

    def derive(self, ctx: dict[Name, Type], m: Term, expected: Type | None = None) -> Derivation:
        missing = [x for x in m.fv if x not in ctx]
        if missing:
            raise E.Unbound(f"unbound variable {sorted(missing)[0]}")
        inner = {x: t for x, t in ctx.items() if x in m.fv}
        d = self.rule(inner, m, expected)
        for x, t in reversed(list(ctx.items())):
            if x in m.fv:
                continue
            self.require_un(t, E.LinearUnused(f"linear variable {x} is never used"))
            d = Derivation("Weaken", {**d.ctx, x: t}, m, d.type, [d], var=x)
        return d

    def binary(self, ctx, m1: Term, m2: Term, build, exp1=None, exp2=None, *, deps=False):
        """Split ``ctx`` between ``m1`` and ``m2``; ``build(d1, m2')`` makes the node.

        ``exp2`` may be a function of the first derivation.
        Returns the node wrapped in Contract nodes for shared unlimited names.
        """
        shared = [x for x in ctx if x in m1.fv and x in m2.fv]
        renames = []
        for x in shared:
            x2 = self.supply.fresh(x)
            self.require_un(ctx[x], E.LinearReused(f"linear variable {x} is used more than once"))
            m2 = rename_term(m2, x2, x)
            renames.append((x, x2))
        c1 = {x: t for x, t in ctx.items() if x in m1.fv}
        c2 = {x: t for x, t in ctx.items() if x in m2.fv}
        for x, x2 in renames:
            c2[x2] = ctx[x]
        d1 = self.derive(c1, m1, exp1)
        e2 = exp2(d1) if callable(exp2) else exp2
        d2 = self.derive(c2, m2, e2)
        node = build(d1, d2)
        node.ctx = {**d1.ctx, **d2.ctx}
        for x, x2 in reversed(renames):
            ctx_now = {k: v for k, v in node.ctx.items() if k != x2}
            term_now = rename_term(node.term, x, x2)
            node = Derivation("Contract", ctx_now, term_now, node.type, [node], var=x, fresh=x2)
        return node

    def expect(self, d: Derivation, expected: Type | None) -> Derivation:
        if expected is not None:
            unify(expected, d.type)
        return d

    # rules

    def rule(self, ctx: dict[Name, Type], m: Term, expected: Type | None) -> Derivation:
        match m:
            case Var(x):
                return self.expect(Derivation("Id", dict(ctx), m, ctx[x]), expected)

            case Discard(x, body):
                if x in body.fv:
                    raise E.LinearReused(f"discarded variable {x} is used afterwards")
                self.require_un(ctx[x], E.LinearUnused(f"linear variable {x} is discarded"))
                d = self.derive({k: v for k, v in ctx.items() if k != x}, body, expected)
                return Derivation("Weaken", dict(ctx), m, d.type, [d], var=x)

            case Lam(x, dom, body):
                t = dom if dom is not None else fresh_hole()
                exp_body = None
                if expected is not None:
                    r = resolve(expected)
                    if isinstance(r, LinFun):
                        unify(t, r.dom)
                        exp_body = r.cod
                d = self.derive({**ctx, x: t}, body, exp_body)
                return self.expect(Derivation("-o-I", dict(ctx), m, LinFun(t, d.type), [d]),
                                   expected)

            case App(f, a):
                def exp_arg(d1):
                    r = resolve(d1.type)
                    if isinstance(r, Hole):
                        unify(r, LinFun(fresh_hole(), fresh_hole()))
                        r = resolve(d1.type)
                    if not isinstance(r, LinFun):
                        raise E.Mismatch(f"applying a non-function of type {show_type(zonk(r))}")
                    return r.dom

                def build(d1, d2):
                    cod = resolve(d1.type).cod
                    return Derivation("-o-E", {}, App(d1.term, d2.term), cod, [d1, d2])

                return self.expect(self.binary(ctx, f, a, build, None, exp_arg), expected)

            case Pair(a, b):
                ea = eb = None
                if expected is not None:
                    r = resolve(expected)
                    if isinstance(r, Times):
                        ea, eb = r.left, r.right

                def build(d1, d2):
                    return Derivation("*-I", {}, Pair(d1.term, d2.term),
                                      Times(d1.type, d2.type), [d1, d2])

                return self.expect(self.binary(ctx, a, b, build, ea, eb), expected)

            case LetPair():
                return self._let_pair(ctx, m, expected)

            case Send(a, c):
                result = fresh_hole(session=True)

                def exp_chan(d1):
                    return Output(d1.type, result)

                def build(d1, d2):
                    return Derivation("Send", {}, Send(d1.term, d2.term), result, [d1, d2])

                return self.expect(self.binary(ctx, a, c, build, None, exp_chan), expected)

            case Receive(c):
                t, s = fresh_hole(), fresh_hole(session=True)
                d = self.derive(ctx, c, Input(t, s))
                return self.expect(Derivation("Receive", dict(ctx), m, Times(t, s), [d]),
                                   expected)

            case Select(label, c):
                d = self.derive(ctx, c)
                r = resolve(d.type)
                if isinstance(r, Hole):
                    raise E.CannotInfer(f"cannot infer the selection type of {c}; annotate it")
                if not isinstance(r, Plus):
                    raise E.Mismatch(f"select on {show_type(zonk(r))}")
                branch = dict(r.branches).get(label)
                if branch is None:
                    raise E.BranchMismatch(f"label {label} not offered by {show_type(zonk(r))}")
                return self.expect(Derivation("Select", dict(ctx), m, branch, [d]), expected)

            case Case():
                return self._case(ctx, m, expected)

            case Fork(x, body, ann):
                s = ann if ann is not None else fresh_hole(session=True)
                if ann is not None and not is_session(ann):
                    raise E.NotSession(f"fork binder {x} has non-session type {show_type(ann)}")
                d = self.derive({**ctx, x: s}, body, END_OUT)
                return self.expect(Derivation("Fork", dict(ctx), Fork(x, d.term, ann),
                                              dual(s), [d]), expected)

            case Link(a, b):
                def exp_right(d1):
                    if not is_session(d1.type):
                        raise E.NotSession(f"link on {show_type(zonk(d1.type))}")
                    return dual(d1.type)

                def build(d1, d2):
                    return Derivation("Link", {}, Link(d1.term, d2.term), END_OUT, [d1, d2])

                try:
                    node = self.binary(ctx, a, b, build, None, exp_right)
                except E.Mismatch as err:
                    raise E.NotDual(f"link endpoints are not dual: {err.message}") from None
                return self.expect(node, expected)

            case SendType(s, c):
                d = self.derive(ctx, c)
                r = resolve(d.type)
                if isinstance(r, Hole):
                    raise E.CannotInfer(f"cannot infer the polymorphic session of {c}")
                if not isinstance(r, OutputType):
                    raise E.Mismatch(f"sendty on {show_type(zonk(r))}")
                if not is_session(s):
                    raise E.NotSession(f"sendty argument {show_type(s)} is not a session")
                return self.expect(Derivation("SendType", dict(ctx), m, subst(r.cont, r.var, s),
                                              [d]), expected)

            case ReceiveType(v, c):
                d = self.derive(ctx, c)
                r = resolve(d.type)
                if isinstance(r, Hole):
                    raise E.CannotInfer(f"cannot infer the polymorphic session of {c}")
                if not isinstance(r, InputType):
                    raise E.Mismatch(f"recvty on {show_type(zonk(r))}")
                for x, t in ctx.items():
                    if v in free_tyvars(zonk(t)):
                        raise E.Mismatch(f"type variable {v} escapes through {x}")
                body = subst(r.cont, r.var, SVar_(v)) if r.var != v else r.cont
                return self.expect(Derivation("ReceiveType", dict(ctx), m, body, [d]), expected)

            case Serve(x, body, ann):
                s = ann if ann is not None else fresh_hole(session=True)
                for y, t in ctx.items():
                    self.require_un(t, E.UnlimitedViolation(
                        f"serve body captures linear variable {y}"))
                d = self.derive({**ctx, x: s}, body, END_OUT)
                return self.expect(Derivation("Serve", dict(ctx), Serve(x, d.term, ann),
                                              Service(dual(s)), [d]), expected)

            case Request(c):
                s = fresh_hole(session=True)
                d = self.derive(ctx, c, Service(s))
                return self.expect(Derivation("Request", dict(ctx), m, s, [d]), expected)

            case CoerceUn(c, ann):
                r = resolve(ann)
                if not isinstance(r, UnFun):
                    raise E.Mismatch(f"coercion (M : T -> U) needs an unlimited function type")
                for y, t in ctx.items():
                    self.require_un(t, E.UnlimitedViolation(
                        f"unlimited function captures linear variable {y}"))
                d = self.derive(ctx, c, LinFun(r.dom, r.cod))
                return self.expect(Derivation("->-I", dict(ctx), CoerceUn(d.term, ann), ann, [d]),
                                   expected)

            case CoerceLin(c, ann):
                r = resolve(ann)
                if not isinstance(r, LinFun):
                    raise E.Mismatch(f"coercion (M : T -o U) needs a linear function type")
                d = self.derive(ctx, c, UnFun(r.dom, r.cod))
                return self.expect(Derivation("->-E", dict(ctx), CoerceLin(d.term, ann), ann, [d]),
                                   expected)

            case Let() | Connect():
                raise TypeError("desugar surface syntax before checking")
        raise TypeError(f"not a term: {m!r}")

    def _let_pair(self, ctx, m: LetPair, expected):
        x, y, s, body = m.x, m.y, m.scrutinee, m.body
        t1, t2 = fresh_hole(), fresh_hole()
        shared = [n for n in ctx if n in s.fv and n in (body.fv - {x, y})]
        renames = []
        for n in shared:
            n2 = self.supply.fresh(n)
            self.require_un(ctx[n], E.LinearReused(f"linear variable {n} is used more than once"))
            body = rename_term(body, n2, n)
            renames.append((n, n2))
        c1 = {n: t for n, t in ctx.items() if n in s.fv}
        c2 = {n: t for n, t in ctx.items() if n in body.fv - {x, y}}
        for n, n2 in renames:
            c2[n2] = ctx[n]
        d1 = self.derive(c1, s, Times(t1, t2))
        d2 = self.derive({**c2, x: t1, y: t2}, body, expected)
        node = Derivation("*-E", {**d1.ctx, **c2}, LetPair(x, y, d1.term, d2.term), d2.type,
                          [d1, d2])
        for n, n2 in reversed(renames):
            node = Derivation("Contract", {k: v for k, v in node.ctx.items() if k != n2},
                              rename_term(node.term, n, n2), node.type, [node], var=n, fresh=n2)
        return node

    def _case(self, ctx, m: Case, expected):
        s, branches = m.scrutinee, m.branches
        if not branches:
            raise E.BranchMismatch("case with no branches")
        labels = [l for l, _, _ in branches]
        if len(set(labels)) != len(labels):
            raise E.BranchMismatch(f"duplicate labels in case: {labels}")
        rest_fv = frozenset().union(*(b.fv - {x} for _, x, b in branches))
        shared = [n for n in ctx if n in s.fv and n in rest_fv]
        renames = []
        for n in shared:
            n2 = self.supply.fresh(n)
            self.require_un(ctx[n], E.LinearReused(f"linear variable {n} is used more than once"))
            branches = tuple((l, x, rename_term(b, n2, n)) for l, x, b in branches)
            renames.append((n, n2))
        rest_fv = frozenset().union(*(b.fv - {x} for _, x, b in branches))
        c1 = {n: t for n, t in ctx.items() if n in s.fv}
        c2 = {n: t for n, t in ctx.items() if n in rest_fv}
        for n, n2 in renames:
            c2[n2] = ctx[n]
        holes = {l: fresh_hole(session=True) for l in labels}
        d1 = self.derive(c1, s)
        r = resolve(d1.type)
        if isinstance(r, Hole):
            unify(r, With(tuple(holes.items())))
        else:
            if not isinstance(r, With):
                raise E.Mismatch(f"case on {show_type(zonk(r))}")
            got = dict(r.branches)
            if set(got) != set(labels):
                raise E.BranchMismatch(f"case labels {sorted(labels)} vs {sorted(got)}")
            holes = got
        result = expected if expected is not None else fresh_hole()
        kids = [d1]
        new_branches = []
        for l, x, b in branches:
            d = self.derive({**c2, x: holes[l]}, b, result)
            kids.append(d)
            new_branches.append((l, x, d.term))
        node = Derivation("Case", {**d1.ctx, **c2}, Case(d1.term, tuple(new_branches)), result,
                          kids)
        for n, n2 in reversed(renames):
            node = Derivation("Contract", {k: v for k, v in node.ctx.items() if k != n2},
                              rename_term(node.term, n, n2), node.type, [node], var=n, fresh=n2)
        return node


def _zonk_derivation(d: Derivation) -> Derivation:
    d.ctx = {x: zonk(t, True) for x, t in d.ctx.items()}
    d.type = zonk(d.type, True)
    d.term = _zonk_term(d.term)
    for c in d.children:
        _zonk_derivation(c)
    return d


def _zonk_term(m: Term) -> Term:
    match m:
        case Lam(x, dom, b):
            return Lam(x, zonk(dom, True) if dom is not None else None, _zonk_term(b))
        case Fork(x, b, a):
            return Fork(x, _zonk_term(b), zonk(a, True) if a is not None else None)
        case Serve(x, b, a):
            return Serve(x, _zonk_term(b), zonk(a, True) if a is not None else None)
    if not subterms(m):
        return m
    return _rebuild(m, [_zonk_term(s) for s in subterms(m)])


def _rebuild(m: Term, subs: list[Term]) -> Term:
    match m:
        case App():
            return App(*subs)
        case Pair():
            return Pair(*subs)
        case Send():
            return Send(*subs)
        case Link():
            return Link(*subs)
        case LetPair(x, y, _, _):
            return LetPair(x, y, *subs)
        case Receive():
            return Receive(*subs)
        case Select(l, _):
            return Select(l, *subs)
        case SendType(s, _):
            return SendType(s, *subs)
        case ReceiveType(v, _):
            return ReceiveType(v, *subs)
        case Request():
            return Request(*subs)
        case CoerceUn(_, a):
            return CoerceUn(subs[0], a)
        case CoerceLin(_, a):
            return CoerceLin(subs[0], a)
        case Case(_, bs):
            return Case(subs[0], tuple((l, x, b) for (l, x, _), b in zip(bs, subs[1:])))
        case Let(x, _, _, ann):
            return Let(x, subs[0], subs[1], ann)
        case Connect(x, _, _):
            return Connect(x, *subs)
        case Discard(x, _):
            return Discard(x, *subs)
    raise TypeError(f"cannot rebuild {m!r}")


def supply_for(*terms: Term, ctx: dict | None = None) -> NameSupply:
    names = set(ctx or ())
    for t in terms:
        names |= term_names(t)
    return NameSupply(max((n.uid for n in names), default=0) + 1)


def typecheck(ctx: dict[Name, Type], m: Term, expected: Type | None = None,
              supply: NameSupply | None = None) -> tuple[Type, Derivation]:
    """Type ``m`` under ``ctx``; returns its type and an explicit derivation."""
    m = desugar(m)
    supply = supply or supply_for(m, ctx=ctx)
    checker = _Checker(supply)
    try:
        d = checker.derive(dict(ctx), m, expected)
        checker.flush()
    except NotASession as err:
        raise E.NotSession(f"{err.args[0]} is not a session type") from None
    d = _zonk_derivation(d)
    return d.type, d


# the session-typed fragment


@dataclass
class PiCheck:
    ok: bool
    offender: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _pi_type(t: Type | None) -> str | None:
    if t is None:
        return None
    t = resolve(t)
    match t:
        case LinFun() | UnFun() | Times():
            return f"non-session type {show_type(zonk(t))}"
        case Output(p, c) | Input(p, c):
            return _pi_type(p) or _pi_type(c)
        case Plus(bs) | With(bs):
            for _, b in bs:
                bad = _pi_type(b)
                if bad:
                    return bad
            return None
        case OutputType(_, c) | InputType(_, c) | Server(c) | Service(c):
            return _pi_type(c)
    return None


def check_pi(m: Term, t: Type | None = None) -> PiCheck:
    """Is ``m`` (of type ``t``) inside the session-typed fragment?"""
    bad = _pi_type(t)
    if bad:
        return PiCheck(False, bad)

    def go(n: Term) -> str | None:
        match n:
            case Lam() | App() | Pair() | CoerceUn() | CoerceLin():
                return f"{type(n).__name__} is outside the fragment: {n}"
            case Receive():
                return f"plain receive outside a pair elimination: {n}"
            case LetPair(_, _, s, b):
                if not isinstance(s, Receive):
                    return f"pair elimination on a non-receive: {n}"
                return go(s.chan) or go(b)
            case Fork(_, b, a) | Serve(_, b, a):
                return _pi_type(a) or go(b)
            case SendType(s, c):
                return _pi_type(s) or go(c)
            case Let() | Connect():
                return "unexpanded surface syntax"
        for s in subterms(n):
            bad = go(s)
            if bad:
                return bad
        return None

    bad = go(m)
    return PiCheck(bad is None, bad)


# surface sugar


def desugar(m: Term, mode: str = "hgv", supply: NameSupply | None = None) -> Term:
    """Remove ``let x = M in N`` and ``with x connect M to N``.

    ``mode="pi"`` expands ``let`` without lambdas, as
    ``send M (fork z. let (x, z') = receive z in link N z')``.
    """
    if not _has_sugar(m):
        return m
    supply = supply or supply_for(m)

    def go(n: Term) -> Term:
        match n:
            case Connect(x, proc, body):
                if body == Var(x):
                    return Fork(x, go(proc))
                return go(Let(x, Fork(x, proc), body))
            case Let(x, bound, body, ann):
                if mode == "pi":
                    return let_pi(x, go(bound), go(body), supply, ann)
                return App(Lam(x, ann, go(body)), go(bound))
            case Lam(x, d, b):
                return Lam(x, d, go(b))
            case Fork(x, b, a):
                return Fork(x, go(b), a)
            case Serve(x, b, a):
                return Serve(x, go(b), a)
            case Var():
                return n
        return _rebuild(n, [go(s) for s in subterms(n)])

    return go(m)


def let_pi(x: Name, bound: Term, body: Term, supply: NameSupply,
           bound_type: Type | None = None, body_type: Type = END_OUT) -> Term:
    z, z2 = supply.fresh("z"), supply.fresh("z")
    ann = None
    if bound_type is not None:
        ann = Input(bound_type, dual(body_type))
    inner = LetPair(x, z2, Receive(Var(z)), Link(body, Var(z2)))
    return Send(bound, Fork(z, inner, ann))


def _has_sugar(m: Term) -> bool:
    if isinstance(m, (Let, Connect)):
        return True
    return any(_has_sugar(s) for s in subterms(m))
