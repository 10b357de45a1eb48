"""Syntax, duality, substitution and alpha-equivalence for both calculi."""
from hypothesis import given, settings
from hypothesis import strategies as st

from sessc.cpsyntax import (ONE, alpha_key, dual_prop, free_names, prop_eq, rename_process,
                            subst_prop)
from sessc.gen import GenConfig, gen_prop, gen_session_type
from sessc.names import Name, NameSupply
from sessc.parser import parse_process, parse_prop, parse_term, parse_type
from sessc.sessions import (Input, Output, dual, free_tyvars, subst, tyvar, type_eq)
from sessc.terms import alpha_key as term_key
from sessc.terms import free_vars

seeds = st.integers(0, 10**6)


def T(s):
    return parse_type(s)


def A(s):
    return parse_prop(s)


def P(s):
    return parse_process(s, unique=False)


# duality


def test_dual_output_keeps_payload():
    """[PAPER] dual(!end?.end!) = ?end?.end?; the payload is not dualised."""
    assert dual(T("!end?.end!")) == T("?end?.end?")


def test_dual_involution_choice():
    """[TRIVIAL] duality is an involution on a choice."""
    s = T("(+){a: end!}")
    assert dual(dual(s)) == s


def test_dual_server_is_service():
    """[PAPER] dual(#end!) = @end?."""
    assert dual(T("#end!")) == T("@end?")


def test_dual_prop_tensor():
    """[PAPER] dual(1 * bot) = bot | 1: both components are dualised."""
    assert dual_prop(A("1 * bot")) == A("bot | 1")


def test_dual_prop_involution_exists():
    """[TRIVIAL] dual(dual(ex X. X)) = ex X. X."""
    a = A("ex X. X")
    assert dual_prop(dual_prop(a)) == a


def test_dual_prop_of_course():
    """[PAPER] dual(!1) = ?bot."""
    assert dual_prop(A("!1")) == A("?bot")


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dual_session_involution(seed):
    """[DERIVED] dual(dual S) = S on generated types of depth 6."""
    s = gen_session_type(GenConfig(seed=seed, max_depth=6))
    assert dual(dual(s)) == s


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dual_prop_involution(seed):
    """[DERIVED] dual(dual A) = A on generated propositions of depth 6."""
    a = gen_prop(GenConfig(seed=seed, max_depth=6, calculus="cp"))
    assert dual_prop(dual_prop(a)) == a


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dual_payloads_untouched(seed):
    """[DERIVED] duality only swaps the direction of a message, never its payload."""
    s = gen_session_type(GenConfig(seed=seed, max_depth=6))
    d = dual(s)
    while isinstance(s, (Output, Input)):
        assert d.payload == s.payload
        s, d = s.cont, d.cont


@settings(max_examples=100, deadline=None)
@given(seeds, seeds)
def test_subst_commutes_with_dual(seed1, seed2):
    """[DERIVED] dual(S{s/X}) = dual(S){s/X}."""
    s = gen_session_type(GenConfig(seed=seed1, max_depth=4))
    r = gen_session_type(GenConfig(seed=seed2, max_depth=2))
    for x in free_tyvars(s) or {"X1"}:
        assert type_eq(dual(subst(s, x, r)), subst(dual(s), x, r))


# substitution


def test_subst_dual_occurrence():
    """[DERIVED] (!X.~X){end!/X} = !end!.end?."""
    assert subst(T("!X.~X"), "X", T("end!")) == T("!end!.end?")


def test_subst_absent_variable():
    """[TRIVIAL] substituting for a variable that does not occur is the identity."""
    s = T("!end?.(+){a: end!}")
    assert subst(s, "X", T("end?")) == s


def test_subst_avoids_capture():
    """[DERIVED] (??Y.X){!Y.end!/X} renames the bound Y."""
    got = subst(T("??Y.X"), "X", T("!Y.end!"))
    assert got.var != "Y"
    assert type_eq(got, T("??Z.!Y.end!"))


def test_subst_prop_dual_occurrence():
    """[DERIVED] (X | ~X){1/X} = 1 | bot."""
    assert subst_prop(A("X | ~X"), "X", ONE) == A("1 | bot")


def test_subst_prop_absent_and_bound():
    """[TRIVIAL] absent variables and bound occurrences are untouched."""
    assert subst_prop(A("1 * bot"), "X", ONE) == A("1 * bot")
    assert subst_prop(A("all X. X"), "X", ONE) == A("all X. X")


def test_prop_eq_up_to_alpha():
    """[TRIVIAL] propositions are compared modulo renaming of their binders."""
    assert prop_eq(A("all X. X | ~X"), A("all Y. Y | ~Y"))


def test_type_eq_ignores_branch_order():
    """[TRIVIAL] branch order does not affect type equality."""
    assert type_eq(T("(&){a: end!, b: end?}"), T("(&){b: end?, a: end!}"))


# names and binding


def test_rename_free_link():
    """[TRIVIAL] (x <-> y){w/x} = w <-> y."""
    assert rename_process(P("x <-> y"), Name("w"), Name("x")) == P("w <-> y")


def test_rename_leaves_bound_name():
    """[TRIVIAL] a bound x is not renamed."""
    p = P("new x (x[] | x(). y[])")
    assert rename_process(p, Name("w"), Name("x")) == p


def test_rename_terminal():
    """[TRIVIAL] x[]{w/x} = w[]."""
    assert rename_process(P("x[]"), Name("w"), Name("x")) == P("w[]")


def test_free_names():
    """[TRIVIAL] free names of links and cuts."""
    assert free_names(P("x <-> y")) == {Name("x"), Name("y")}
    assert free_names(P("new x (x <-> y | x[])")) == {Name("y")}


def test_free_vars_of_lambda():
    """[TRIVIAL] free_vars(fn x. x y) = {y}."""
    assert free_vars(parse_term("fn x. x y")) == {Name("y")}


def test_alpha_terms():
    """[TRIVIAL] fn x. x and fn y. y are alpha-equivalent."""
    assert term_key(parse_term("fn x. x")) == term_key(parse_term("fn y. y"))


def test_alpha_processes():
    """[TRIVIAL] bound names are forgotten, free names are rigid."""
    assert alpha_key(P("new x (x <-> a | x[])")) == alpha_key(P("new y (y <-> a | y[])"))
    assert alpha_key(P("x <-> a")) != alpha_key(P("y <-> a"))


def test_alpha_key_ignores_uids_of_binders():
    """[TRIVIAL] uniquifying binders does not change the alpha key."""
    p = "new x (x[] | x(). new y (y[] | y(). z[]))"
    assert alpha_key(parse_process(p)) == alpha_key(P(p))


def test_name_supply_strictly_increasing():
    """[TRIVIAL] the supply never reissues a uid, even after a bump."""
    s = NameSupply()
    a, b = s.fresh("x"), s.fresh("x")
    s.bump(Name("y", 40))
    c = s.fresh(a)
    assert a.uid < b.uid < c.uid and c.uid > 40 and c.base == "x"


def test_tyvar_flip_twice():
    """[TRIVIAL] flipping polarity twice is the identity."""
    v = tyvar("X").var
    assert v.flip().flip() == v and v.flip() != v
