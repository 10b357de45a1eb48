"""Structural equivalence, cut reduction, normalization and reachability."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reduction_cases import CASES, run_case
from sessc.cp import cp_typecheck
from sessc.cpsyntax import Cut, EmptyIn, Out, free_names
from sessc.engine import (COMMUTING, PRINCIPAL, StepLimitExceeded, all_steps, canonicalize,
                          commuting_step, equiv, find_step, normalize, principal_step, reaches)
from sessc.gen import GenConfig, gen_typed_process
from sessc.names import Name
from sessc.parser import load, parse_cp, parse_process
from sessc.verify import corpus_files

seeds = st.integers(0, 10**6)


def P(s):
    return parse_process(s)


def gen(seed, depth=4):
    return gen_typed_process(GenConfig(seed=seed, max_depth=depth, calculus="cp"))


# equivalence


def test_link_symmetry():
    """[PAPER] x <-> y is equivalent to y <-> x."""
    assert equiv(P("x <-> y"), P("y <-> x"))


def test_cut_symmetry():
    """[PAPER] the two sides of a cut commute."""
    assert equiv(P("new x (x[] | x(). z[])"), P("new x (x(). z[] | x[])"))


def test_different_constructors():
    """[TRIVIAL] x[] and x(). x'[] are not equivalent."""
    assert not equiv(P("x[]"), P("x(). w[]"))


def test_cut_associativity():
    """[PAPER] new y (new x (P | Q) | R) is equivalent to new x (P | new y (Q | R))."""
    p = P("new y (new x (x[] | x(). y[]) | y(). z[])")
    q = P("new x (x[] | new y (x(). y[] | y(). z[]))")
    assert equiv(p, q)


def test_canonical_form_of_swapped_cut():
    """[TRIVIAL] swapping the sides of a cut does not change the canonical form."""
    p, q = P("new x (x[] | x(). z[])"), P("new x (x(). z[] | x[])")
    assert equiv(canonicalize(p), canonicalize(q))


def test_alpha_in_equivalence():
    """[TRIVIAL] bound names do not matter, free names do."""
    assert equiv(P("new x (x[] | x(). z[])"), P("new y (y[] | y(). z[])"))
    assert not equiv(P("new x (x[] | x(). z[])"), P("new x (x[] | x(). w[])"))


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_canonicalize_idempotent(seed):
    """[TRIVIAL] canonicalizing twice changes nothing."""
    _, p = gen(seed)
    c = canonicalize(p)
    assert equiv(canonicalize(c), c) and equiv(c, p)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_equiv_is_an_equivalence(seed):
    """[DERIVED] reflexive, symmetric and transitive on sampled triples."""
    _, p = gen(seed)
    q = canonicalize(p)
    r = _swap_all(q)
    assert equiv(p, p)
    assert equiv(p, q) and equiv(q, p)
    assert equiv(q, r) and equiv(p, r)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_equiv_is_a_congruence(seed):
    """[DERIVED] equivalent processes stay equivalent under a prefix and a cut."""
    _, p = gen(seed)
    q = _swap_all(p)
    w, k = Name("ctxw", 10**6), Name("ctxk", 10**6 + 1)
    assert equiv(EmptyIn(w, p), EmptyIn(w, q))
    assert equiv(Out(w, k, p, p), Out(w, k, q, q))


@settings(max_examples=60, deadline=None)
@given(seeds, seeds)
def test_canonical_forms_decide_equivalence(seed1, seed2):
    """[DERIVED] equal canonical keys iff equivalent, on generated pairs."""
    _, p = gen(seed1)
    _, q = gen(seed2)
    from sessc.engine import canonical_key
    assert (canonical_key(p) == canonical_key(q)) == equiv(p, q)
    assert canonical_key(p) == canonical_key(_swap_all(p))


def _swap_all(p):
    from sessc.cpsyntax import map_children
    if isinstance(p, Cut):
        return Cut(p.name, _swap_all(p.right), _swap_all(p.left))
    return map_children(p, _swap_all)


# single steps


@pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
def test_golden_reduction(case):
    """[DERIVED] one step of each reduction rule, reduct computed by hand."""
    assert run_case(case) == (case[0], True, True)


def test_golden_suite_covers_every_rule():
    """[TRIVIAL] eight principal rules and ten commuting conversions."""
    assert sorted(c[0] for c in CASES) == sorted(PRINCIPAL + COMMUTING)
    assert len(PRINCIPAL) == 8 and len(COMMUTING) == 10


def test_principal_link():
    """[PAPER] new x (w <-> x | P) reduces to P{w/x}."""
    s = principal_step(P("new x (w <-> x | x(). z[])"))
    assert s.rule == "ax" and equiv(s.result, P("w(). z[]"))


def test_principal_one_bot():
    """[PAPER] new x (x[] | x(). P) reduces to P."""
    s = principal_step(P("new x (x[] | x(). y[])"))
    assert s.rule == "one-bot" and equiv(s.result, P("y[]"))


def test_principal_tensor_par():
    """[PAPER] new x (x[y].(P | Q) | x(y). R) reduces to new y (P | new x (Q | R))."""
    s = principal_step(P("new x (x[y].(y[] | x[]) | x(y). y(). x(). z[])"))
    assert equiv(s.result, P("new y (y[] | new x (x[] | y(). x(). z[]))"))


def test_principal_server_weakening():
    """[PAPER] an unused server disappears."""
    s = principal_step(P("new x (!x(y). y[] | z[])"))
    assert s.rule == "weaken" and equiv(s.result, P("z[]"))


def test_commuting_input():
    """[PAPER] new z (x(y). P | Q) reduces to x(y). new z (P | Q)."""
    s = commuting_step(P("new z (x(y). y(). z[] | z(). w[])"))
    assert s.rule == "comm-in" and equiv(s.result, P("x(y). new z (y(). z[] | z(). w[])"))


def test_no_conversion_for_terminal():
    """[TRIVIAL] x[] has no continuation to commute into."""
    assert commuting_step(P("new z (x[] | z(). w[])")) is None
    assert all_steps(P("new z (x[] | z(). w[])")) == []


def test_commuting_bot():
    """[PAPER] new z (x(). P | Q) reduces to x(). new z (P | Q)."""
    s = commuting_step(P("new z (x(). z[] | z(). w[])"))
    assert s.rule == "comm-bot" and equiv(s.result, P("x(). new z (z[] | z(). w[])"))


# normalization


def test_normalize_one_step():
    """[DERIVED] a single one-bot step."""
    r = normalize(P("new x (x[] | x(). y[])"))
    assert r.steps == 1 and equiv(r.process, P("y[]"))


def test_normalize_normal_form():
    """[TRIVIAL] a normal form takes zero steps."""
    r = normalize(P("y[]"))
    assert r.steps == 0 and equiv(r.process, P("y[]"))


def test_normalize_link():
    """[DERIVED] new z (z[] | x <-> z) reduces to x[] by the link rule."""
    r = normalize(P("new z (z[] | x <-> z)"))
    assert r.steps == 1 and r.trace.entries[0].rule == "ax" and equiv(r.process, P("x[]"))


def test_step_limit_carries_partial_trace():
    """[TRIVIAL] the limit error keeps the steps taken so far."""
    p = P("new x (x[] | x(). new y (y[] | y(). z[]))")
    with pytest.raises(StepLimitExceeded) as err:
        normalize(p, max_steps=1)
    assert len(err.value.trace) == 1


def test_trace_export():
    """[TRIVIAL] text and structured traces agree on rules and paths."""
    import json
    r = normalize(P("new x (x[] | x(). new y (y[] | y(). z[]))"))
    text = r.trace.to_text().splitlines()
    data = json.loads(r.trace.to_json())
    assert len(text) == 1 + r.steps == 1 + len(data["steps"])
    assert all(s["rule"] in text[i + 1] for i, s in enumerate(data["steps"]))
    assert {"rule", "path", "before", "after"} <= set(data["steps"][0])


def test_corpus_normal_forms(corpus_dir):
    """[DERIVED] every corpus process reaches its hand-computed normal form, audited."""
    rules = set()
    for path in corpus_files(corpus_dir, "cp"):
        src = load(path)
        r = normalize(src.subject, audit_ctx=src.context)
        assert r.violations == [], path
        assert equiv(r.process, parse_process(src.expected)), path
        rules |= set(r.trace.rules())
    assert rules == set(PRINCIPAL + COMMUTING)


def test_principal_only_terminates_on_corpus(corpus_dir):
    """[DERIVED] principal steps alone terminate on the corpus."""
    for path in corpus_files(corpus_dir, "cp"):
        p = load(path).subject
        for _ in range(10_000):
            s = principal_step(p)
            if s is None:
                break
            p = s.result
        else:
            pytest.fail(path)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_subject_reduction(seed):
    """[DERIVED] every step of an audited normalization keeps the typing."""
    ctx, p = gen(seed)
    assert normalize(p, audit_ctx=ctx).violations == []


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_strategies_agree(seed):
    """[DERIVED] leftmost-outermost and rightmost-innermost give equivalent normal forms."""
    _, p = gen(seed)
    assert equiv(normalize(p, strategy="lo").process, normalize(p, strategy="ri").process)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_normal_forms_are_cut_free_or_stuck(seed):
    """[DERIVED] no step applies to a normal form, and it keeps the free names."""
    ctx, p = gen(seed)
    nf = normalize(p).process
    assert find_step(nf) is None
    assert free_names(nf) <= free_names(p)
    cp_typecheck(ctx, nf)


# reachability


def test_reaches_reflexive():
    """[TRIVIAL] every process reaches itself, even with bound 0."""
    p = P("new x (x[] | x(). z[])")
    assert reaches(p, p, 0).found


def test_reaches_one_step():
    """[DERIVED] new z (z[] | x <-> z) reaches x[]."""
    r = reaches(P("new z (z[] | x <-> z)"), P("x[]"), 10)
    assert r.found and [s.rule for s in r.path] == ["ax"]


def test_reaches_exhausted():
    """[TRIVIAL] a normal form reaches nothing else."""
    r = reaches(P("x[]"), P("y[]"), 10)
    assert not r.found and r.exhausted and r.status == "not-found"


def test_reaches_bound():
    """[TRIVIAL] a search cut short reports the bound, not exhaustion."""
    p, _ = parse_cp(load_text("contract_server.cp"))
    r = reaches(p, P("w[]"), 2)
    assert not r.found and r.status == "bound-reached"


def test_reaches_modulo_equivalence():
    """[DERIVED] the target only needs to match up to equivalence."""
    p = P("new x (x[] | x(). new y (y(). z[] | y[]))")
    assert reaches(p, P("new y (y[] | y(). z[])"), 100).found


def load_text(name):
    import os
    from conftest import CORPUS
    with open(os.path.join(CORPUS, "cp", name)) as fh:
        return fh.read()
