"""Linear typechecking of HGV and the session-typed fragment."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sessc import errors as E
from sessc.gen import GenConfig, gen_typed_term
from sessc.hgv import check_pi, desugar, typecheck
from sessc.names import Name
from sessc.parser import load, parse_hgv, parse_term, parse_type
from sessc.sessions import is_unlimited, type_eq
from sessc.terms import alpha_eq, show_term
from sessc.verify import corpus_files

seeds = st.integers(0, 10**6)


def check(src, expected=None):
    m, ctx = parse_hgv(src)
    t, _ = typecheck(ctx, m, parse_type(expected) if expected else None)
    return t


def T(s):
    return parse_type(s)


# unlimited types


def test_services_are_unlimited():
    """[PAPER] services are unlimited."""
    assert is_unlimited(T("@end!"))


def test_end_in_is_unlimited():
    """[PAPER] end? is unlimited."""
    assert is_unlimited(T("end?"))


def test_linear_types():
    """[PAPER] outputs and linear functions are linear."""
    assert not is_unlimited(T("!end!.end!"))
    assert not is_unlimited(T("end! -o end!"))


# typing


def test_variable():
    """[PAPER] x : S |- x : S."""
    assert check("ctx x: !end!.end?. x") == T("!end!.end?")


def test_identity():
    """[TRIVIAL] fn x:T. x has type T -o T."""
    assert check("fn x: !end?.end!. x") == T("!end?.end! -o !end?.end!")


def test_fork_identity():
    """[DERIVED] fork x. x : end? with x : end!."""
    assert check("fork x. x") == T("end?")


def test_link_split():
    """[DERIVED] x : S, y : dual S |- link x y : end!."""
    assert check("ctx x: !end!.end?, y: ?end!.end!. link x y") == T("end!")


def test_linear_reuse_rejected():
    """[TRIVIAL] a linear variable used twice."""
    with pytest.raises(E.LinearReused):
        check("fn x. (x, x)")


def test_linear_unused_rejected():
    """[TRIVIAL] a linear variable dropped."""
    with pytest.raises(E.LinearUnused):
        check("ctx x: end!, y: end!. x")


def test_unlimited_dropped_and_duplicated():
    """[DERIVED] end? may be weakened and services contracted."""
    assert check("ctx x: end!, y: end?. x") == T("end!")
    assert check("ctx s: @end!. (request s, request s)") == T("end! * end!")


def test_unbound():
    """[TRIVIAL] free variable with no context entry."""
    with pytest.raises(E.Unbound):
        check("z")


def test_link_not_dual():
    """[TRIVIAL] link of two outputs."""
    with pytest.raises(E.NotDual):
        check("ctx x: end!, y: end!. link x y")


def test_serve_captures_linear():
    """[TRIVIAL] a server body may only mention unlimited names."""
    with pytest.raises(E.UnlimitedViolation):
        check("ctx y: end!. serve x. y")


def test_unlimited_function_captures_linear():
    """[TRIVIAL] the unlimited coercion needs an unlimited context."""
    with pytest.raises(E.UnlimitedViolation):
        check("ctx x: end!. (fn y: end?. x : end? -> end!)")


def test_receive_on_non_input():
    """[TRIVIAL] receive on an output channel."""
    with pytest.raises(E.Mismatch):
        check("ctx x: end!. receive x")


def test_case_labels_must_match():
    """[TRIVIAL] case branches must cover exactly the offered labels."""
    with pytest.raises(E.BranchMismatch):
        check("ctx x: (&){a: end!, b: end!}. case x { a(y). y }")


def test_receive_type_side_condition():
    """[PAPER] X must not occur free in the rest of the context."""
    assert check("ctx x: ??X.!X.end!. recvty X. x") == T("!X.end!")
    with pytest.raises(E.CheckError):
        check("ctx w: X, x: ??X.!X.end!. recvty X. link w x")



def test_send_type_substitutes():
    """[PAPER] sendty S M : S'{S/X}."""
    assert check("ctx x: !!X.!X.~X. sendty end! x") == T("!end!.end?")


def test_serve_and_request():
    """[DERIVED] serve x:S. M has type @(dual S); request recovers S."""
    assert check("serve x: end!. x") == T("@end?")
    assert check("ctx s: @end!. request s") == T("end!")


def test_typecheck_is_deterministic():
    """[TRIVIAL] same input, same derivation."""
    m, ctx = parse_hgv("ctx x: !end!.end?, y: @end!. fork z. link x z")
    t1, d1 = typecheck(ctx, m)
    t2, d2 = typecheck(ctx, m)
    assert t1 == t2 and d1.pretty() == d2.pretty()


def test_explicit_structural_nodes():
    """[DERIVED] unused unlimited names get Weaken nodes, reused ones Contract nodes."""
    m, ctx = parse_hgv("ctx s: @end!, u: end?. (request s, request s)")
    _, d = typecheck(ctx, m)
    assert {"Weaken", "Contract"} <= d.rules()
    assert any(n.rule == "Weaken" and n.var == Name("u") for n in d.walk())


def test_corpus_types(corpus_dir):
    """[DERIVED] every corpus program has its hand-derived type."""
    files = corpus_files(corpus_dir, "hgv")
    assert len(files) >= 30
    for path in files:
        src = load(path)
        t, _ = typecheck(src.context, src.subject)
        assert type_eq(t, parse_type(src.expected)), path


def test_corpus_covers_every_rule(corpus_dir):
    """[DERIVED] the corpus exercises every typing rule."""
    seen = set()
    for path in corpus_files(corpus_dir, "hgv"):
        src = load(path)
        seen |= typecheck(src.context, src.subject)[1].rules()
    from sessc.hgv import RULES
    assert set(RULES) <= seen


# the session-typed fragment


def test_pi_accepts_session_program():
    """[DERIVED] fork x. let (v,x) = receive x in link v x is in the fragment."""
    assert check_pi(parse_term("fork x. let (v,x) = receive x in link v x"))


def test_pi_rejects_plain_receive():
    """[PAPER] plain receive is excluded."""
    assert not check_pi(parse_term("receive x"))


def test_pi_rejects_lambda():
    """[TRIVIAL] lambdas are excluded."""
    r = check_pi(parse_term("fn x. x"))
    assert not r and r.offender


# sugar


def test_connect_is_fork():
    """[PAPER] with x connect M to x = fork x. M."""
    assert alpha_eq(desugar(parse_term("with x connect send y x to x")),
                    parse_term("fork x. send y x"))


def test_let_in_hgv():
    """[PAPER] let x = M in N = (fn x. N) M."""
    assert alpha_eq(desugar(parse_term("let x = a in x")), parse_term("(fn x. x) a"))


def test_let_in_pi():
    """[PAPER] let x = M in N = send M (fork z. let (x,z) = receive z in link N z)."""
    got = desugar(parse_term("let x = a in x"), mode="pi")
    want = parse_term("send a (fork z. let (x, w) = receive z in link x w)")
    assert alpha_eq(got, want), show_term(got)


# properties


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_generated_terms_typecheck(seed):
    """[TRIVIAL] generated terms are well typed at their recorded type."""
    ctx, m, t = gen_typed_term(GenConfig(seed=seed, max_depth=4))
    got, _ = typecheck(ctx, m)
    assert type_eq(got, t)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_weakening_admissible(seed):
    """[DERIVED] adding an unlimited entry keeps the type."""
    ctx, m, t = gen_typed_term(GenConfig(seed=seed, max_depth=4))
    extra = {**ctx, Name("spare", 10**6): T("@!end!.end?")}
    got, d = typecheck(extra, m)
    assert type_eq(got, t) and "Weaken" in d.rules()


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_derivation_term_retypes(seed):
    """[DERIVED] the term recorded in a derivation re-derives the same type."""
    ctx, m, _ = gen_typed_term(GenConfig(seed=seed, max_depth=4))
    t, d = typecheck(ctx, m)
    assert type_eq(typecheck(ctx, d.term)[0], t)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_generation_is_deterministic(seed):
    """[TRIVIAL] identical configs give byte-identical terms."""
    a = gen_typed_term(GenConfig(seed=seed, max_depth=4))
    b = gen_typed_term(GenConfig(seed=seed, max_depth=4))
    assert show_term(a[1]) == show_term(b[1])
