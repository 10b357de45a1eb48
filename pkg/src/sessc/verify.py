"""Mechanical checks of the translation theorems on a corpus plus generated subjects.

Each check runs one subject through a pipeline and returns an ``ItemResult``;
``verify`` collects them into a ``Report`` in path-sorted order.
"""
from __future__ import annotations

import glob
import os
import time
from collections import Counter
from dataclasses import dataclass, field

from .cp import check_sequent_eq, cp_typecheck
from .cp import supply_for as cp_supply
from .cpsyntax import ONE, Cut, EmptyOut, Process, Prop, dual_prop, show_process
from .engine import StepLimitExceeded, equiv, normalize, reaches
from .errors import CheckError
from .gen import GenConfig, GenerationError, gen_typed_process, gen_typed_term
from .hgv import check_pi, typecheck
from .hgv import supply_for as hgv_supply
from .names import Name
from .parser import load
from .sessions import END_OUT, Type, show_type, type_eq
from .terms import Term, show_term
from .translate import (LAMBDA_RULES, tr_cp, tr_ctx_cp, tr_ctx_gv, tr_ctx_pi, tr_gv, tr_pi,
                        tr_type_cp, tr_type_pi)

THEOREMS = ("t1", "t2", "t3", "factor", "soundness")


@dataclass
class ItemResult:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0
    rules: dict = field(default_factory=dict)       # rule tags used by a witness
    violations: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail,
                "seconds": round(self.seconds, 4), "rules": self.rules,
                "violations": self.violations}


@dataclass
class Report:
    theorem: str
    items: list[ItemResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(i.ok for i in self.items)

    @property
    def failed(self) -> list[ItemResult]:
        return [i for i in self.items if not i.ok]

    @property
    def violations(self) -> int:
        return sum(len(i.violations) for i in self.items)

    def summary(self) -> str:
        n = len(self.items)
        secs = sum(i.seconds for i in self.items)
        return (f"{self.theorem}: {n - len(self.failed)}/{n} passed, "
                f"{self.violations} subject-reduction violations, {secs:.2f}s")

    def to_text(self) -> str:
        lines = [f"{'PASS' if i.ok else 'FAIL'}\t{i.name}\t{i.detail}" for i in self.items]
        return "\n".join(lines + [self.summary()])

    def as_dict(self) -> dict:
        return {"theorem": self.theorem, "ok": self.ok, "summary": self.summary(),
                "items": [i.as_dict() for i in self.items]}


# pipelines


def lower_pi(ctx: dict[Name, Type], m: Term) -> tuple[dict[Name, Type], Term, Type]:
    """Check ``m`` and translate it into HGVpi; returns the lowered context, term and type."""
    t, d = typecheck(ctx, m)
    m2 = tr_pi(d, hgv_supply(m, ctx=ctx))
    return tr_ctx_pi(ctx), m2, tr_type_pi(t)


def check_t1(ctx: dict[Name, Type], m: Term) -> str:
    c2, m2, t2 = lower_pi(ctx, m)
    got, _ = typecheck(c2, m2, t2)
    if not type_eq(got, t2):
        raise CheckError(f"lowered term has type {show_type(got)}, not {show_type(t2)}")
    pi = check_pi(m2, t2)
    if not pi:
        raise CheckError(f"lowered term leaves the fragment: {pi.offender}")
    return f"|- {show_term(m2)} : {show_type(t2)}"


def cp_of(ctx: dict[Name, Type], m: Term, direct: bool = False, z: Name | None = None):
    """``[[m]]z`` with its CP context; ``m`` must be in HGVpi unless ``direct``."""
    supply = hgv_supply(m, ctx=ctx)
    if z is not None:
        supply.bump(z)
    t, d = typecheck(ctx, m)
    z = z or supply.fresh("z")
    p = tr_cp(d, z, supply, direct)
    return {**tr_ctx_cp(ctx), z: dual_prop(tr_type_cp(t))}, p, z


def check_t2(ctx: dict[Name, Type], m: Term) -> str:
    c2, m2, _ = lower_pi(ctx, m)
    gamma, p, _ = cp_of(c2, m2)
    d = cp_typecheck(gamma, p)
    if not check_sequent_eq(d):
        raise CheckError("CP derivation does not recheck")
    return show_process(p)


def hgv_of(ctx: dict[Name, Prop], p: Process) -> tuple[dict[Name, Type], Term]:
    d = cp_typecheck(ctx, p)
    return tr_ctx_gv(ctx), tr_gv(d, cp_supply(p, ctx=ctx))


def check_t3(ctx: dict[Name, Prop], p: Process) -> str:
    phi, m = hgv_of(ctx, p)
    t, _ = typecheck(phi, m, END_OUT)
    pi = check_pi(m, t)
    if not pi:
        raise CheckError(f"lifted term leaves the fragment: {pi.offender}")
    return show_term(m)


def _audit(p: Process, ctx: dict[Name, Prop], max_steps: int):
    """Normalize ``p`` re-checking every step; returns (normal form, violations, note).

    Subject reduction presupposes a typed start, so an untypable ``p`` is
    normalized without auditing and reported in the note instead.
    """
    note = ""
    try:
        cp_typecheck(ctx, p)
        audit = ctx
    except CheckError as err:
        audit, note = None, f"start not typable ({err}); not audited"
    try:
        r = normalize(p, max_steps, audit_ctx=audit)
    except StepLimitExceeded as err:
        return None, [f"no normal form within {err.limit} steps"], note
    return r.process, r.violations, note


def check_reach(start: Process, goal: Process, ctx: dict[Name, Prop], bound: int,
                max_steps: int = 10_000) -> ItemResult:
    """``start -->* goal``, plus audited normalization of both ends."""
    r = reaches(start, goal, bound)
    n1, v1, note1 = _audit(start, ctx, max_steps)
    n2, v2, note2 = _audit(goal, ctx, max_steps)
    notes = "; ".join(n for n in (note1, note2) if n)
    rules = dict(Counter(s.rule for s in r.path))
    if r.found:
        detail = f"found in {len(r.path)} steps ({r.explored} states)"
        return ItemResult("", True, detail + (f"; {notes}" if notes else ""), rules=rules,
                          violations=v1 + v2)
    same = n1 is not None and n2 is not None and equiv(n1, n2)
    detail = (f"search {r.status} after {r.explored} states; "
              f"normal forms {'agree' if same else 'differ'}")
    return ItemResult("", False, detail + (f"; {notes}" if notes else ""), violations=v1 + v2)


def check_factor(ctx: dict[Name, Type], m: Term, bound: int = 50_000) -> ItemResult:
    c2, m2, _ = lower_pi(ctx, m)
    z = hgv_supply(m, m2, ctx=ctx).fresh("z")
    gamma, via_pi, _ = cp_of(c2, m2, z=z)
    _, direct, _ = cp_of(ctx, m, direct=True, z=z)
    return check_reach(via_pi, direct, gamma, bound)


def check_soundness(ctx: dict[Name, Prop], p: Process, bound: int = 50_000) -> ItemResult:
    phi, m = hgv_of(ctx, p)
    supply = hgv_supply(m, ctx=phi)
    t, d = typecheck(phi, m, END_OUT)
    z = supply.fresh("z")
    start = Cut(z, EmptyOut(z), tr_cp(d, z, supply), ONE)
    return check_reach(start, p, ctx, bound)


# harness


def uses_lambda(ctx: dict[Name, Type], m: Term) -> bool:
    _, d = typecheck(ctx, m)
    return bool(d.rules() & (LAMBDA_RULES - {"Receive"}))


def corpus_files(corpus: str, calculus: str) -> list[str]:
    return sorted(glob.glob(os.path.join(corpus, calculus, f"*.{calculus}")))


def _run(name: str, fn, *args) -> ItemResult:
    t0 = time.perf_counter()
    try:
        out = fn(*args)
        res = out if isinstance(out, ItemResult) else ItemResult(name, True, out)
    except (CheckError, ValueError, GenerationError) as err:
        res = ItemResult(name, False, f"{type(err).__name__}: {err}")
    res.name = name
    res.seconds = time.perf_counter() - t0
    return res


def _hgv_subjects(corpus: str | None, random: int, seed: int, depth: int):
    if corpus:
        for path in corpus_files(corpus, "hgv"):
            src = load(path)
            yield os.path.relpath(path, corpus), src.context, src.subject
    for i in range(random):
        ctx, m, _ = gen_typed_term(GenConfig(seed=seed + i, max_depth=depth))
        yield f"random-term-{seed + i}", ctx, m


def _cp_subjects(corpus: str | None, random: int, seed: int, depth: int):
    if corpus:
        for path in corpus_files(corpus, "cp"):
            src = load(path)
            yield os.path.relpath(path, corpus), src.context, src.subject
    for i in range(random):
        ctx, p = gen_typed_process(GenConfig(seed=seed + i, max_depth=depth, calculus="cp"))
        yield f"random-process-{seed + i}", ctx, p


def verify(theorem: str, corpus: str | None = "corpus", random: int = 0, seed: int = 0,
           bound: int = 50_000, depth: int | None = None) -> Report:
    """Check one theorem on the corpus plus ``random`` generated subjects.

    Generated subjects are used for t1, t2 (terms of depth 5) and t3
    (processes of depth 4); factor and soundness run on the corpus only.
    """
    report = Report(theorem)
    match theorem:
        case "t1" | "t2":
            fn = check_t1 if theorem == "t1" else check_t2
            for name, ctx, m in _hgv_subjects(corpus, random, seed, depth or 5):
                report.items.append(_run(name, fn, ctx, m))
        case "t3":
            for name, ctx, p in _cp_subjects(corpus, random, seed, depth or 4):
                report.items.append(_run(name, check_t3, ctx, p))
        case "factor":
            for name, ctx, m in _hgv_subjects(corpus, 0, seed, 0):
                if uses_lambda(ctx, m):
                    report.items.append(_run(name, check_factor, ctx, m, bound))
        case "soundness":
            for name, ctx, p in _cp_subjects(corpus, 0, seed, 0):
                report.items.append(_run(name, check_soundness, ctx, p, bound))
        case _:
            raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    return report


def verify_all(corpus: str | None = "corpus", random: int = 0, seed: int = 0,
               bound: int = 50_000) -> list[Report]:
    return [verify(t, corpus, random, seed, bound) for t in THEOREMS]
