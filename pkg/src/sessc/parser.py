"""Concrete syntax for HGV and CP.

HGV types:  !T.S  ?T.S  (+){l: S, ...}  (&){l: S, ...}  end!  end?  X  ~X
            !!X.S  ??X.S  #S  @S  T -o U  T -> U  T * U
HGV terms:  fn x:T. M   M N   (M, N)   let (x, y) = M in N   send M N   receive M
            select l M   case M { l(x). N; ... }   fork x. M   link M N   sendty S M
            recvty X. M   serve x. M   request M   (M : T -> U)   (M : T -o U)
            let x = M in N   with x connect M to N
            fork and serve binders take an optional annotation: fork x:S. M
CP props:   A * B  A | B  +{l: A, ...}  &{l: A, ...}  1  bot  !A  ?A  ex X. A  all X. A
CP procs:   x <-> y   new x (P | Q)   new x:A (P | Q)   x[y].(P | Q)   x(y). P   x[l]. P
            case x { l. P; ... }   !x(y). P   ?x[y]. P   x[A]. P   x(X). P   x[]   x(). P

Names start lower case, type variables upper case. A name may carry a uid
suffix (``x#3``). Comments run from ``--`` to the end of the line. A source
file may start with a context header ``ctx x: A, y: B.`` and may declare
its expected type in a comment ``-- expect: T``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .cpsyntax import (BOTTOM, ONE, Amp, Bang, CaseP, Cut, EmptyIn, EmptyOut, Exists,
                       Forall, In, Inject, LinkP, OfCourse, Oplus, Out, OutType, Par,
                       Process, Prop, PVar, Query, Tensor, InType, WhyNot, all_names)
from .errors import ParseError
from .names import Name, NameSupply, TypeVar
from .sessions import (END_IN, END_OUT, Input, InputType, LinFun, Output, OutputType, Plus,
                       SVar, Server, Service, Times, Type, UnFun, With)
from .terms import (App, Case, CoerceLin, CoerceUn, Connect, Discard, Fork, Lam, Let,
                    LetPair, Link, Pair, Receive, ReceiveType, Request, Select, Send, SendType, Serve,
                    Term, Var, term_names)

TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<sym><->|-o|->|\(\+\)|\(&\)|!!|\?\?|end!|end\?|[()\[\]{},.:;|*!?#@~+&=])
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:\#\d+)?)
""", re.VERBOSE)

KEYWORDS = {"new", "case", "ex", "all", "bot", "ctx", "fn", "let", "in", "send", "receive",
            "select", "fork", "link", "sendty", "recvty", "serve", "request", "with",
            "connect", "to", "discard"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "ident" and chunk in KEYWORDS:
                kind = "sym"
            out.append(Token(kind, chunk, line, pos - line_start + 1))
        for i, ch in enumerate(chunk):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def _name(text: str) -> Name:
    if "#" in text:
        base, uid = text.split("#")
        return Name(base, int(uid))
    return Name(text)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text in texts

    def error(self, msg: str):
        raise ParseError(msg + f" (found {self.tok.text or 'end of input'!r})",
                         self.tok.line, self.tok.col)

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        t = self.tok.text
        self.i += 1
        return t

    def name(self) -> Name:
        t = self.ident()
        if not (t[0].islower() or t[0] == "_"):
            self.error(f"names start lower case: {t}")
        return _name(t)

    def tyvar(self) -> str:
        t = self.ident()
        if not t[0].isupper():
            self.error(f"type variables start upper case: {t}")
        return t

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("trailing input")

    # HGV types

    def hgv_type(self) -> Type:
        left = self.hgv_prod()
        if self.at("-o"):
            self.i += 1
            return LinFun(left, self.hgv_type())
        if self.at("->"):
            self.i += 1
            return UnFun(left, self.hgv_type())
        return left

    def hgv_prod(self) -> Type:
        left = self.hgv_prefix()
        if self.at("*"):
            self.i += 1
            return Times(left, self.hgv_prod())
        return left

    def hgv_prefix(self) -> Type:
        t = self.tok
        if self.at("!", "?"):
            self.i += 1
            payload = self.hgv_prefix()
            self.eat(".")
            cont = self.hgv_prefix()
            return (Output if t.text == "!" else Input)(payload, cont)
        if self.at("!!", "??"):
            self.i += 1
            v = self.tyvar()
            self.eat(".")
            cont = self.hgv_prefix()
            return (OutputType if t.text == "!!" else InputType)(v, cont)
        if self.at("#"):
            self.i += 1
            return Server(self.hgv_prefix())
        if self.at("@"):
            self.i += 1
            return Service(self.hgv_prefix())
        if self.at("(+)", "(&)"):
            self.i += 1
            bs = self.branches(self.hgv_type)
            return (Plus if t.text == "(+)" else With)(bs)
        if self.at("end!"):
            self.i += 1
            return END_OUT
        if self.at("end?"):
            self.i += 1
            return END_IN
        if self.at("~"):
            self.i += 1
            return SVar(TypeVar(self.tyvar(), True))
        if self.at("("):
            self.i += 1
            inner = self.hgv_type()
            self.eat(")")
            return inner
        if t.kind == "ident":
            return SVar(TypeVar(self.tyvar()))
        self.error("expected a type")

    def branches(self, item):
        self.eat("{")
        out = []
        while True:
            label = self.ident()
            self.eat(":")
            out.append((label, item()))
            if self.at(","):
                self.i += 1
                continue
            break
        self.eat("}")
        labels = [l for l, _ in out]
        if len(set(labels)) != len(labels):
            self.error(f"duplicate labels {labels}")
        return tuple(out)

    # HGV terms

    def term(self) -> Term:
        if self.at("fn"):
            self.i += 1
            x = self.name()
            dom = None
            if self.at(":"):
                self.i += 1
                dom = self.hgv_type()
            self.eat(".")
            return Lam(x, dom, self.term())
        if self.at("fork", "serve"):
            kw = self.tok.text
            self.i += 1
            x = self.name()
            ann = None
            if self.at(":"):
                self.i += 1
                ann = self.hgv_type()
            self.eat(".")
            body = self.term()
            return Fork(x, body, ann) if kw == "fork" else Serve(x, body, ann)
        if self.at("recvty"):
            self.i += 1
            v = self.tyvar()
            self.eat(".")
            return ReceiveType(v, self.term())
        if self.at("let"):
            self.i += 1
            if self.at("("):
                self.i += 1
                x = self.name()
                self.eat(",")
                y = self.name()
                self.eat(")")
                self.eat("=")
                s = self.term()
                self.eat("in")
                return LetPair(x, y, s, self.term())
            x = self.name()
            ann = None
            if self.at(":"):
                self.i += 1
                ann = self.hgv_type()
            self.eat("=")
            s = self.term()
            self.eat("in")
            return Let(x, s, self.term(), ann)
        if self.at("discard"):
            self.i += 1
            x = self.name()
            self.eat("in")
            return Discard(x, self.term())
        if self.at("with"):
            self.i += 1
            x = self.name()
            self.eat("connect")
            m = self.term()
            self.eat("to")
            return Connect(x, m, self.term())
        return self.app()

    def starts_atom(self) -> bool:
        return self.tok.kind == "ident" or self.at("(", "case")

    def app(self) -> Term:
        head = self.head()
        while self.starts_atom():
            head = App(head, self.atom())
        return head

    def head(self) -> Term:
        t = self.tok
        if self.at("send"):
            self.i += 1
            a = self.atom()
            return Send(a, self.atom())
        if self.at("link"):
            self.i += 1
            a = self.atom()
            return Link(a, self.atom())
        if self.at("receive"):
            self.i += 1
            return Receive(self.atom())
        if self.at("request"):
            self.i += 1
            return Request(self.atom())
        if self.at("select"):
            self.i += 1
            label = self.ident()
            return Select(label, self.atom())
        if self.at("sendty"):
            self.i += 1
            s = self.hgv_prefix()
            return SendType(s, self.atom())
        if t.kind == "ident" or self.at("(", "case"):
            return self.atom()
        self.error("expected a term")

    def atom(self) -> Term:
        if self.tok.kind == "ident":
            return Var(self.name())
        if self.at("case"):
            self.i += 1
            s = self.term()
            self.eat("{")
            bs = []
            while not self.at("}"):
                label = self.ident()
                self.eat("(")
                x = self.name()
                self.eat(")")
                self.eat(".")
                bs.append((label, x, self.term()))
                if self.at(";"):
                    self.i += 1
                    continue
                break
            self.eat("}")
            if not bs:
                self.error("case needs at least one branch")
            labels = [l for l, _, _ in bs]
            if len(set(labels)) != len(labels):
                self.error(f"duplicate labels {labels}")
            return Case(s, tuple(bs))
        if self.at("("):
            self.i += 1
            inner = self.term()
            if self.at(","):
                self.i += 1
                right = self.term()
                self.eat(")")
                return Pair(inner, right)
            if self.at(":"):
                self.i += 1
                ann = self.hgv_type()
                self.eat(")")
                if isinstance(ann, UnFun):
                    return CoerceUn(inner, ann)
                if isinstance(ann, LinFun):
                    return CoerceLin(inner, ann)
                self.error("coercions take T -> U or T -o U")
            self.eat(")")
            return inner
        self.error("expected a term")

    # CP propositions

    def prop(self) -> Prop:
        if self.at("ex", "all"):
            kw = self.tok.text
            self.i += 1
            v = self.tyvar()
            self.eat(".")
            body = self.prop()
            return Exists(v, body) if kw == "ex" else Forall(v, body)
        left = self.prop_unary()
        if self.at("*"):
            self.i += 1
            return Tensor(left, self.prop())
        if self.at("|"):
            self.i += 1
            return Par(left, self.prop())
        return left

    def prop_unary(self) -> Prop:
        t = self.tok
        if self.at("!", "?"):
            self.i += 1
            inner = self.prop_unary()
            return OfCourse(inner) if t.text == "!" else WhyNot(inner)
        if self.at("!!", "??"):
            self.i += 1
            inner = self.prop_unary()
            make = OfCourse if t.text == "!!" else WhyNot
            return make(make(inner))
        if self.at("+", "&"):
            self.i += 1
            bs = self.branches(self.prop)
            return (Oplus if t.text == "+" else Amp)(bs)
        if self.at("bot"):
            self.i += 1
            return BOTTOM
        if t.kind == "num" and t.text == "1":
            self.i += 1
            return ONE
        if self.at("~"):
            self.i += 1
            return PVar(TypeVar(self.tyvar(), True))
        if self.at("("):
            self.i += 1
            inner = self.prop()
            self.eat(")")
            return inner
        if t.kind == "ident":
            return PVar(TypeVar(self.tyvar()))
        self.error("expected a proposition")

    # CP processes

    def process(self) -> Process:
        t = self.tok
        if self.at("new"):
            self.i += 1
            x = self.name()
            ann = None
            if self.at(":"):
                self.i += 1
                ann = self.prop()
            self.eat("(")
            left = self.process()
            self.eat("|")
            right = self.process()
            self.eat(")")
            return Cut(x, left, right, ann)
        if self.at("case"):
            self.i += 1
            x = self.name()
            self.eat("{")
            bs = []
            while not self.at("}"):
                label = self.ident()
                self.eat(".")
                bs.append((label, self.process()))
                if self.at(";"):
                    self.i += 1
                    continue
                break
            self.eat("}")
            if not bs:
                self.error("case needs at least one branch")
            return CaseP(x, tuple(bs))
        if self.at("!", "?"):
            self.i += 1
            x = self.name()
            if t.text == "!":
                self.eat("(")
                y = self.name()
                self.eat(")")
                self.eat(".")
                return Bang(x, y, self.process())
            self.eat("[")
            y = self.name()
            self.eat("]")
            self.eat(".")
            return Query(x, y, self.process())
        if self.at("("):
            self.i += 1
            inner = self.process()
            self.eat(")")
            return inner
        if t.kind != "ident":
            self.error("expected a process")
        x = self.name()
        if self.at("<->"):
            self.i += 1
            return LinkP(x, self.name())
        if self.at("("):
            self.i += 1
            if self.at(")"):
                self.i += 1
                self.eat(".")
                return EmptyIn(x, self.process())
            inner = self.ident()
            self.eat(")")
            self.eat(".")
            if inner[0].isupper():
                return InType(x, inner, self.process())
            return In(x, _name(inner), self.process())
        if self.at("["):
            self.i += 1
            if self.at("]"):
                self.i += 1
                return EmptyOut(x)
            if self.tok.kind == "ident" and self.tok.text[0].islower() \
                    and self.peek().text == "]":
                word = self.ident()
                self.eat("]")
                self.eat(".")
                if self.at("("):
                    save = self.i
                    try:
                        self.i += 1
                        left = self.process()
                        self.eat("|")
                        right = self.process()
                        self.eat(")")
                        return Out(x, _name(word), left, right)
                    except ParseError:
                        self.i = save
                return Inject(x, word, self.process())
            a = self.prop()
            self.eat("]")
            self.eat(".")
            return OutType(x, a, self.process())
        self.error("expected a process")

    # context headers

    def context(self, item) -> dict[Name, object]:
        ctx: dict[Name, object] = {}
        if not self.at("ctx"):
            return ctx
        self.i += 1
        while not self.at("."):
            x = self.name()
            self.eat(":")
            if x in ctx:
                self.error(f"duplicate context entry {x}")
            ctx[x] = item()
            if self.at(","):
                self.i += 1
                continue
            break
        self.eat(".")
        return ctx


# uniquification


def uniquify_term(m: Term, taken: set[Name]) -> Term:
    """Give every binder a distinct name, keeping names that are already fresh."""
    seen = set(taken) | set(m.fv)
    supply = NameSupply(max((n.uid for n in seen | term_names(m)), default=0) + 1)

    def fresh(x: Name) -> Name:
        if x in seen:
            x = supply.fresh(x)
        seen.add(x)
        return x

    def go(t: Term, env: dict) -> Term:
        v = lambda n: env.get(n, n)  # noqa: E731
        match t:
            case Var(x):
                return Var(v(x))
            case Lam(x, d, b):
                x2 = fresh(x)
                return Lam(x2, d, go(b, {**env, x: x2}))
            case Fork(x, b, a):
                x2 = fresh(x)
                return Fork(x2, go(b, {**env, x: x2}), a)
            case Serve(x, b, a):
                x2 = fresh(x)
                return Serve(x2, go(b, {**env, x: x2}), a)
            case LetPair(x, y, s, b):
                s2 = go(s, env)
                x2, y2 = fresh(x), fresh(y)
                return LetPair(x2, y2, s2, go(b, {**env, x: x2, y: y2}))
            case Let(x, s, b, ann):
                s2 = go(s, env)
                x2 = fresh(x)
                return Let(x2, s2, go(b, {**env, x: x2}), ann)
            case Connect(x, s, b):
                x2 = fresh(x)
                e2 = {**env, x: x2}
                return Connect(x2, go(s, e2), go(b, e2))
            case Case(s, bs):
                s2 = go(s, env)
                out = []
                for l, x, b in bs:
                    x2 = fresh(x)
                    out.append((l, x2, go(b, {**env, x: x2})))
                return Case(s2, tuple(out))
            case App(a, b):
                return App(go(a, env), go(b, env))
            case Pair(a, b):
                return Pair(go(a, env), go(b, env))
            case Send(a, b):
                return Send(go(a, env), go(b, env))
            case Link(a, b):
                return Link(go(a, env), go(b, env))
            case Receive(c):
                return Receive(go(c, env))
            case Select(l, c):
                return Select(l, go(c, env))
            case SendType(s, c):
                return SendType(s, go(c, env))
            case ReceiveType(x, c):
                return ReceiveType(x, go(c, env))
            case Request(c):
                return Request(go(c, env))
            case CoerceUn(c, a):
                return CoerceUn(go(c, env), a)
            case CoerceLin(c, a):
                return CoerceLin(go(c, env), a)
            case Discard(x, b):
                return Discard(v(x), go(b, env))
        raise TypeError(f"not a term: {t!r}")

    return go(m, {})


def uniquify_process(p: Process, taken: set[Name]) -> Process:
    seen = set(taken) | set(p.fn)
    supply = NameSupply(max((n.uid for n in seen | all_names(p)), default=0) + 1)

    def fresh(x: Name) -> Name:
        if x in seen:
            x = supply.fresh(x)
        seen.add(x)
        return x

    def go(q: Process, env: dict) -> Process:
        v = lambda n: env.get(n, n)  # noqa: E731
        match q:
            case LinkP(x, y):
                return LinkP(v(x), v(y))
            case Cut(x, l, r, ann):
                x2 = fresh(x)
                e2 = {**env, x: x2}
                return Cut(x2, go(l, e2), go(r, e2), ann)
            case Out(x, y, a, b):
                y2 = fresh(y)
                return Out(v(x), y2, go(a, {**env, y: y2}), go(b, env))
            case In(x, y, c) | Bang(x, y, c) | Query(x, y, c):
                y2 = fresh(y)
                return type(q)(v(x), y2, go(c, {**env, y: y2}))
            case Inject(x, l, c):
                return Inject(v(x), l, go(c, env))
            case CaseP(x, bs):
                return CaseP(v(x), tuple((l, go(b, env)) for l, b in bs))
            case OutType(x, a, c):
                return OutType(v(x), a, go(c, env))
            case InType(x, a, c):
                return InType(v(x), a, go(c, env))
            case EmptyOut(x):
                return EmptyOut(v(x))
            case EmptyIn(x, c):
                return EmptyIn(v(x), go(c, env))
        raise TypeError(f"not a process: {q!r}")

    return go(p, {})


# entry points


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.hgv_type()
    p.expect_eof()
    return t


def parse_prop(text: str) -> Prop:
    p = _Parser(text)
    a = p.prop()
    p.expect_eof()
    return a


def parse_term(text: str, unique: bool = True) -> Term:
    return parse_hgv(text, unique)[0]


def parse_process(text: str, unique: bool = True) -> Process:
    return parse_cp(text, unique)[0]


EXPECT_RE = re.compile(r"--\s*expect:\s*(.+)$", re.MULTILINE)


def parse_hgv(text: str, unique: bool = True) -> tuple[Term, dict[Name, Type]]:
    p = _Parser(text)
    ctx = p.context(p.hgv_type)
    m = p.term()
    p.expect_eof()
    if unique:
        m = uniquify_term(m, set(ctx))
    return m, ctx


def parse_cp(text: str, unique: bool = True) -> tuple[Process, dict[Name, Prop]]:
    p = _Parser(text)
    ctx = p.context(p.prop)
    q = p.process()
    p.expect_eof()
    if unique:
        q = uniquify_process(q, set(ctx))
    return q, ctx


@dataclass
class SourceFile:
    path: str
    calculus: str
    text: str
    subject: object
    context: dict = field(default_factory=dict)
    expected: str | None = None


def load(path: str) -> SourceFile:
    with open(path) as fh:
        text = fh.read()
    calculus = "cp" if path.endswith(".cp") else "hgv"
    m = EXPECT_RE.search(text)
    expected = m.group(1).strip() if m else None
    if calculus == "cp":
        subject, ctx = parse_cp(text)
    else:
        subject, ctx = parse_hgv(text)
    return SourceFile(path, calculus, text, subject, ctx, expected)
