"""Translations between HGV, HGVpi and CP.

* ``tr_pi``: HGV to its session-typed fragment (functions and pairs become
  processes on fresh channels).
* ``tr_cp``: HGVpi to CP, a CPS translation on derivations that sends the
  result of a term to a continuation channel ``z``. With ``direct=True`` it
  also covers functions and pairs without going through ``tr_pi``.
* ``tr_gv``: CP back to HGVpi.

All translations work on checked derivations so that they can annotate the
binders they introduce.
"""
from __future__ import annotations

from .cp import CPDerivation
from .cpsyntax import (BOTTOM, ONE, Amp, Bang, Bottom, CaseP, Cut, EmptyIn, EmptyOut, Exists,
                       Forall, In, Inject, InType, LinkP, OfCourse, One, Oplus, Out, OutType,
                       Par, Process, Prop, PVar, Query, Tensor, WhyNot, dual_prop,
                       rename_process, subst_prop, pvar)
from .hgv import Derivation, let_pi
from .names import Name, NameSupply, TypeVar
from .sessions import (END_IN, END_OUT, EndIn, EndOut, Input, InputType, LinFun, Output,
                       OutputType, Plus, Server, Service, SVar, Times, Type, UnFun, With,
                       dual)
from .terms import (Case, Discard, Fork, Lam, LetPair, Link, Receive, ReceiveType, Request, Select,
                    Send, SendType, Serve, Term, Var, rename_term)


class NotInFragment(ValueError):
    """Raised when the plain CP translation meets a function or pair."""


# HGV to HGVpi


def tr_type_pi(t: Type) -> Type:
    match t:
        case LinFun(a, b):
            return Output(tr_type_pi(a), tr_type_pi(b))
        case UnFun(a, b):
            return Service(Output(tr_type_pi(a), tr_type_pi(b)))
        case Times(a, b):
            return Input(tr_type_pi(a), tr_type_pi(b))
        case Output(p, c):
            return Output(tr_type_pi(p), tr_type_pi(c))
        case Input(p, c):
            return Input(tr_type_pi(p), tr_type_pi(c))
        case Plus(bs):
            return Plus(tuple((l, tr_type_pi(s)) for l, s in bs))
        case With(bs):
            return With(tuple((l, tr_type_pi(s)) for l, s in bs))
        case OutputType(x, c):
            return OutputType(x, tr_type_pi(c))
        case InputType(x, c):
            return InputType(x, tr_type_pi(c))
        case Server(s):
            return Server(tr_type_pi(s))
        case Service(s):
            return Service(tr_type_pi(s))
    return t


def tr_ctx_pi(ctx: dict[Name, Type]) -> dict[Name, Type]:
    return {x: tr_type_pi(t) for x, t in ctx.items()}


def tr_pi(d: Derivation, supply: NameSupply) -> Term:
    """The HGVpi term simulating the conclusion of ``d``."""
    go = lambda c: tr_pi(c, supply)  # noqa: E731
    kids = d.children
    m = d.term
    match d.rule:
        case "Id":
            return m
        case "Weaken":
            inner = go(kids[0])
            return Discard(d.var, inner) if isinstance(m, Discard) else inner
        case "Contract":
            return rename_term(go(kids[0]), d.var, d.fresh)
        case "-o-I":
            z, z2 = supply.fresh("z"), supply.fresh("z")
            t = tr_type_pi(d.type)
            inner = LetPair(m.binder, z2, Receive(Var(z)), Link(go(kids[0]), Var(z2)))
            return Fork(z, inner, dual(t))
        case "-o-E":
            return Send(go(kids[1]), go(kids[0]))
        case "*-I":
            z = supply.fresh("z")
            t = tr_type_pi(d.type)
            return Fork(z, Link(Send(go(kids[0]), Var(z)), go(kids[1])), dual(t))
        case "*-E":
            return LetPair(m.x, m.y, Receive(go(kids[0])), go(kids[1]))
        case "Receive":
            return go(kids[0])
        case "->-I":
            z = supply.fresh("z")
            t = tr_type_pi(d.type)
            return Serve(z, Link(go(kids[0]), Var(z)), dual(t.body))
        case "->-E":
            return Request(go(kids[0]))
        case "Send":
            return Send(go(kids[0]), go(kids[1]))
        case "Select":
            return Select(m.label, go(kids[0]))
        case "Case":
            bs = tuple((l, x, go(k)) for (l, x, _), k in zip(m.branches, kids[1:]))
            return Case(go(kids[0]), bs)
        case "Fork":
            return Fork(m.binder, go(kids[0]), tr_type_pi(kids[0].ctx[m.binder]))
        case "Serve":
            return Serve(m.binder, go(kids[0]), tr_type_pi(kids[0].ctx[m.binder]))
        case "Link":
            return Link(go(kids[0]), go(kids[1]))
        case "SendType":
            return SendType(tr_type_pi(m.stype), go(kids[0]))
        case "ReceiveType":
            return ReceiveType(m.var, go(kids[0]))
        case "Request":
            return Request(go(kids[0]))
    raise ValueError(f"unknown rule {d.rule}")


# HGVpi to CP


def tr_type_cp(t: Type) -> Prop:
    """Sessions map to their CP reading; other types to the dual of their flip."""
    match t:
        case Output(p, c):
            return Tensor(dual_prop(tr_type_cp(p)), tr_type_cp(c))
        case Input(p, c):
            return Par(tr_type_cp(p), tr_type_cp(c))
        case EndOut():
            return ONE
        case EndIn():
            return BOTTOM
        case Plus(bs):
            return Oplus(tuple((l, tr_type_cp(s)) for l, s in bs))
        case With(bs):
            return Amp(tuple((l, tr_type_cp(s)) for l, s in bs))
        case Server(s):
            return OfCourse(tr_type_cp(s))
        case Service(s):
            return WhyNot(tr_type_cp(s))
        case SVar(v):
            return PVar(v)
        case OutputType(x, c):
            return Exists(x, tr_type_cp(c))
        case InputType(x, c):
            return Forall(x, tr_type_cp(c))
        case LinFun() | UnFun() | Times():
            return dual_prop(flip(t))
    raise TypeError(f"not a type: {t!r}")


def flip(t: Type) -> Prop:
    """The implementation side of a simulated type; a session flips to the dual of its reading."""
    match t:
        case LinFun(a, b):
            return Par(dual_prop(flip(a)), flip(b))
        case UnFun(a, b):
            return OfCourse(Par(dual_prop(flip(a)), flip(b)))
        case Times(a, b):
            return Tensor(flip(a), flip(b))
    return dual_prop(tr_type_cp(t))


def tr_ctx_cp(ctx: dict[Name, Type]) -> dict[Name, Prop]:
    return {x: tr_type_cp(t) for x, t in ctx.items()}


LAMBDA_RULES = {"-o-I", "-o-E", "*-I", "*-E", "->-I", "->-E", "Receive"}


def tr_cp(d: Derivation, z: Name, supply: NameSupply, direct: bool = False) -> Process:
    """The CP process for ``d`` that outputs its result on ``z``.

    Its typing is the translated context plus ``z`` at the dual of the
    translated result type. Every cut it introduces is annotated.
    """
    go = lambda c, w: tr_cp(c, w, supply, direct)  # noqa: E731
    kids = d.children
    m = d.term

    def user(c: Derivation) -> Prop:
        # type at which a continuation channel of ``c`` is used by the cut's left side
        return dual_prop(tr_type_cp(c.type))

    if d.rule in LAMBDA_RULES and not direct:
        # *-E on a receive is the fused form and stays in the fragment
        if not (d.rule == "*-E" and kids[0].rule == "Receive") and d.rule != "Receive":
            raise NotInFragment(f"rule {d.rule} is outside HGVpi; translate with direct=True")

    match d.rule:
        case "Id":
            return LinkP(m.name, z)
        case "Weaken":
            inner = go(kids[0], z)
            if isinstance(d.ctx[d.var], EndIn):
                return EmptyIn(d.var, inner)
            return inner
        case "Contract":
            inner = go(kids[0], z)
            if isinstance(d.ctx[d.var], EndIn):
                return Cut(d.fresh, inner, EmptyOut(d.fresh), BOTTOM)
            return rename_process(inner, d.var, d.fresh)
        case "Send":
            x, y = supply.fresh("x"), supply.fresh("y")
            out = Out(x, y, go(kids[0], y), LinkP(x, z))
            return Cut(x, out, go(kids[1], x), tr_type_cp(kids[1].type))
        case "*-E":
            src = kids[0]
            return Cut(m.y, go(src, m.y), In(m.y, m.x, go(kids[1], z)), user(src))
        case "Receive":
            return go(kids[0], z)
        case "Select":
            x = supply.fresh("x")
            return Cut(x, go(kids[0], x), Inject(x, m.label, LinkP(x, z)), user(kids[0]))
        case "Case":
            x = supply.fresh("x")
            bs = tuple((l, rename_process(go(k, z), x, b))
                       for (l, b, _), k in zip(m.branches, kids[1:]))
            return Cut(x, go(kids[0], x), CaseP(x, bs), user(kids[0]))
        case "Fork":
            y = supply.fresh("y")
            body = Cut(y, go(kids[0], y), EmptyOut(y), BOTTOM)
            return Cut(m.binder, body, LinkP(m.binder, z), tr_type_cp(kids[0].ctx[m.binder]))
        case "Link":
            x = supply.fresh("x")
            return EmptyIn(z, Cut(x, go(kids[0], x), go(kids[1], x), user(kids[0])))
        case "SendType":
            x = supply.fresh("x")
            rest = OutType(x, tr_type_cp(m.stype), LinkP(x, z))
            return Cut(x, go(kids[0], x), rest, user(kids[0]))
        case "ReceiveType":
            x = supply.fresh("x")
            return Cut(x, go(kids[0], x), InType(x, m.var, LinkP(x, z)), user(kids[0]))
        case "Serve":
            x = supply.fresh("x")
            return Bang(z, m.binder, Cut(x, go(kids[0], x), EmptyOut(x), BOTTOM))
        case "Request":
            x, y = supply.fresh("x"), supply.fresh("y")
            return Cut(x, go(kids[0], x), Query(x, y, LinkP(y, z)), user(kids[0]))
        # direct translation of functions and pairs
        case "-o-I":
            return In(z, m.binder, go(kids[0], z))
        case "-o-E":
            x, y = supply.fresh("x"), supply.fresh("y")
            rest = Out(y, x, go(kids[1], x), LinkP(y, z))
            return Cut(y, go(kids[0], y), rest, user(kids[0]))
        case "->-I":
            y = supply.fresh("y")
            return Bang(z, y, go(kids[0], y))
        case "->-E":
            x, y = supply.fresh("x"), supply.fresh("y")
            return Cut(y, go(kids[0], y), Query(y, x, LinkP(x, z)), user(kids[0]))
        case "*-I":
            y = supply.fresh("y")
            return Out(z, y, go(kids[0], y), go(kids[1], z))
    raise ValueError(f"unknown rule {d.rule}")


# CP to HGVpi


def tr_type_gv(a: Prop) -> Type:
    match a:
        case Tensor(l, r):
            return Output(dual(tr_type_gv(l)), tr_type_gv(r))
        case Par(l, r):
            return Input(tr_type_gv(l), tr_type_gv(r))
        case One():
            return END_OUT
        case Bottom():
            return END_IN
        case Oplus(bs):
            return Plus(tuple((k, tr_type_gv(b)) for k, b in bs))
        case Amp(bs):
            return With(tuple((k, tr_type_gv(b)) for k, b in bs))
        case Exists(x, b):
            return OutputType(x, tr_type_gv(b))
        case Forall(x, b):
            return InputType(x, tr_type_gv(b))
        case WhyNot(b):
            return Service(tr_type_gv(b))
        case OfCourse(b):
            return Server(tr_type_gv(b))
        case PVar(v):
            return SVar(v)
    raise TypeError(f"not a proposition: {a!r}")


def tr_ctx_gv(ctx: dict[Name, Prop]) -> dict[Name, Type]:
    return {x: tr_type_gv(a) for x, a in ctx.items()}


def tr_gv(d: CPDerivation, supply: NameSupply, env: dict[Name, Name] | None = None) -> Term:
    """The HGVpi term of type end! simulating the process of ``d``.

    ``env`` maps CP names to the HGV variables currently standing for them;
    a channel rebound by ``let`` gets a fresh variable so binders stay unique.
    """
    env = env or {}
    v = lambda n: Var(env.get(n, n))  # noqa: E731
    kids = d.children
    p = d.proc

    def sub(c: CPDerivation, *pairs: tuple[Name, Name]) -> Term:
        return tr_gv(c, supply, {**env, **dict(pairs)})

    def let(x: Name, bound: Term, c: CPDerivation, bound_type: Type) -> Term:
        x2 = supply.fresh(x)
        return let_pi(x2, bound, sub(c, (x, x2)), supply, bound_type)

    if d.rule == "Weaken":
        return sub(kids[0])
    if d.rule == "Contract":
        return tr_gv(kids[0], supply, {**env, d.fresh: env.get(d.var, d.var)})

    match p:
        case LinkP(x, y):
            return Link(v(x), v(y))
        case Cut(x, _, _):
            a = d.cut_type
            x1, x2 = supply.fresh(x), supply.fresh(x)
            fork = Fork(x1, sub(kids[0], (x, x1)), tr_type_gv(a))
            return let_pi(x2, fork, sub(kids[1], (x, x2)), supply, tr_type_gv(dual_prop(a)))
        case Out(x, y, _, _):
            t = d.ctx[x]
            y1 = supply.fresh(y)
            fork = Fork(y1, sub(kids[0], (y, y1)), tr_type_gv(t.left))
            return let(x, Send(fork, v(x)), kids[1], tr_type_gv(t.right))
        case In(x, y, _):
            x2, y2 = supply.fresh(x), supply.fresh(y)
            return LetPair(y2, x2, Receive(v(x)), sub(kids[0], (x, x2), (y, y2)))
        case Inject(x, label, _):
            t = dict(d.ctx[x].branches)[label]
            return let(x, Select(label, v(x)), kids[0], tr_type_gv(t))
        case CaseP(x, bs):
            out = []
            for (label, _), k in zip(bs, kids):
                x2 = supply.fresh(x)
                out.append((label, x2, sub(k, (x, x2))))
            return Case(v(x), tuple(out))
        case EmptyOut(x):
            return v(x)
        case EmptyIn(x, _):
            return Discard(env.get(x, x), sub(kids[0]))
        case OutType(x, a, _):
            t = d.ctx[x]
            return let(x, SendType(tr_type_gv(a), v(x)), kids[0],
                       tr_type_gv(subst_prop(t.body, t.var, a)))
        case InType(x, var, _):
            t = d.ctx[x]
            body = t.body if t.var == var else subst_prop(t.body, t.var, pvar(var))
            return let(x, ReceiveType(var, v(x)), kids[0], tr_type_gv(body))
        case Bang(s, x, _):
            t = d.ctx[s]
            x1 = supply.fresh(x)
            return Link(v(s), Serve(x1, sub(kids[0], (x, x1)), tr_type_gv(t.body)))
        case Query(s, x, _):
            t = d.ctx[s]
            return let(x, Request(v(s)), kids[0], tr_type_gv(t.body))
    raise ValueError(f"unknown process {p!r}")
