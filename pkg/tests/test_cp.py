"""Typechecking CP processes."""
import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sessc import errors as E
from sessc.cp import CP_RULES, check_sequent_eq, cp_typecheck
from sessc.cpsyntax import ONE, dual_prop
from sessc.engine import canonicalize
from sessc.gen import GenConfig, gen_prop, gen_typed_process
from sessc.names import Name
from sessc.parser import load, parse_cp, parse_process
from sessc.verify import corpus_files

seeds = st.integers(0, 10**6)


def check(src):
    p, ctx = parse_cp(src)
    return cp_typecheck(ctx, p)


def test_axiom():
    """[PAPER] x <-> z |- x: bot, z: 1."""
    assert check("ctx x: bot, z: 1. x <-> z").rule == "Ax"


def test_one():
    """[PAPER] x[] |- x: 1."""
    assert check("ctx x: 1. x[]").rule == "1"


def test_implicit_weakening():
    """[PAPER] a ?-typed name may be added to any sequent."""
    assert "Weaken" in check("ctx y: 1, x: ?bot. y[]").rules()


def test_implicit_contraction():
    """[DERIVED] a ?-typed name used twice is contracted."""
    d = check("ctx x: ?bot, z: 1. ?x[a]. ?x[b]. a(). b(). z[]")
    assert "Contract" in d.rules() and check_sequent_eq(d)


def test_wrong_terminal():
    """[TRIVIAL] x[] |- x: bot is rejected."""
    with pytest.raises(E.Mismatch):
        check("ctx x: bot. x[]")


def test_linear_unused():
    """[TRIVIAL] a non-? name must be used."""
    with pytest.raises(E.LinearUnused):
        check("ctx x: 1, y: 1. x[]")


def test_server_context_condition():
    """[PAPER] a server may only capture ?-typed names."""
    with pytest.raises(E.UnlimitedViolation):
        check("ctx x: !1, y: 1. !x(a). y[]")


def test_cut_requires_duals():
    """[TRIVIAL] both sides of a cut at 1."""
    with pytest.raises(E.NotDual):
        check("ctx x: 1. new y (y[] | y[])")


def test_unbound():
    """[TRIVIAL] a name outside the context."""
    with pytest.raises(E.Unbound):
        check("ctx z: 1. w[]")


def test_sequent_check_accepts_checker_output():
    """[TRIVIAL] derivations from the checker recheck."""
    assert check_sequent_eq(check("ctx x: 1 * 1, y: bot | bot. x <-> y"))


def test_sequent_check_rejects_deleted_entry():
    """[TRIVIAL] a premise missing a context entry."""
    d = check("ctx x: 1, y: bot. y(). x[]")
    child = d.children[0]
    broken = dataclasses.replace(d, children=[dataclasses.replace(child, ctx={})])
    assert not check_sequent_eq(broken)


def test_sequent_check_rejects_non_dual_cut():
    """[TRIVIAL] a cut whose recorded type is not dual to the other side."""
    d = check("ctx z: 1. new x (x[] | x(). z[])")
    assert d.rule == "Cut"
    right = d.children[1]
    bad_ctx = {k: (ONE if k.base == "x" else v) for k, v in right.ctx.items()}
    broken = dataclasses.replace(d, children=[d.children[0],
                                              dataclasses.replace(right, ctx=bad_ctx)])
    assert not check_sequent_eq(broken)


def test_corpus_typechecks(corpus_dir):
    """[DERIVED] every corpus process is well typed, and together they use every rule."""
    files = corpus_files(corpus_dir, "cp")
    assert len(files) >= 30
    seen = set()
    for path in files:
        src = load(path)
        d = cp_typecheck(src.context, src.subject)
        assert check_sequent_eq(d), path
        seen |= d.rules()
    assert set(CP_RULES) <= seen


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_axiom_at_every_type(seed):
    """[PAPER] x <-> y |- x: dual A, y: A for every A."""
    a = gen_prop(GenConfig(seed=seed, max_depth=5, calculus="cp"))
    p = parse_process("x <-> y", unique=False)
    assert cp_typecheck({Name("x"): dual_prop(a), Name("y"): a}, p).rule == "Ax"


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_generated_processes_typecheck(seed):
    """[TRIVIAL] generated processes are well typed."""
    ctx, p = gen_typed_process(GenConfig(seed=seed, max_depth=4, calculus="cp"))
    assert check_sequent_eq(cp_typecheck(ctx, p))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_exchange(seed):
    """[DERIVED] context order does not matter."""
    ctx, p = gen_typed_process(GenConfig(seed=seed, max_depth=4, calculus="cp"))
    items = list(ctx.items())
    random.Random(seed).shuffle(items)
    cp_typecheck(dict(items), p)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_subject_congruence(seed):
    """[DERIVED] a structurally equivalent process has the same typing."""
    ctx, p = gen_typed_process(GenConfig(seed=seed, max_depth=4, calculus="cp"))
    cp_typecheck(ctx, canonicalize(p))
