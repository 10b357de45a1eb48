"""The verification harness."""
import pytest

from sessc.cp import cp_typecheck
from sessc.cpsyntax import show_process
from sessc.engine import equiv
from sessc.names import Name
from sessc.parser import parse_cp, parse_hgv, parse_process, parse_prop
from sessc.verify import (THEOREMS, check_factor, check_soundness, check_t2, cp_of, verify,
                          verify_all)


def test_soundness_on_terminal():
    """[DERIVED] x[] lifts to x, which maps back to x <-> z; one link step returns x[]."""
    p, ctx = parse_cp("ctx x: 1. x[]")
    r = check_soundness(ctx, p)
    assert r.ok and r.rules == {"ax": 1}


def test_t2_on_variable():
    """[DERIVED] x at end! becomes x <-> z with x: 1, z: bot."""
    m, ctx = parse_hgv("ctx x: end!. x")
    gamma, p, z = cp_of(ctx, m, z=Name("z"))
    assert equiv(p, parse_process("x <-> z", unique=False))
    assert gamma == {Name("x"): parse_prop("1"), Name("z"): parse_prop("bot")}
    cp_typecheck(gamma, p)
    check_t2(ctx, m)


def test_factor_on_session_program():
    """[TRIVIAL] without non-session constructs both pipelines give the same process."""
    m, ctx = parse_hgv("ctx x: !end!.end?, y: ?end!.end!. link x y")
    a = cp_of(ctx, m, z=Name("z"))[1]
    b = cp_of(ctx, m, direct=True, z=Name("z"))[1]
    assert show_process(a) == show_process(b)
    assert check_factor(ctx, m).ok


def test_factor_on_lambda():
    """[DERIVED] the factored and direct images of an application are related by reduction."""
    m, ctx = parse_hgv("ctx a: end!. (fn x: end!. x) a")
    r = check_factor(ctx, m)
    assert r.ok and r.rules


def test_unknown_theorem():
    """[TRIVIAL] only the five theorems are known."""
    with pytest.raises(ValueError):
        verify("t4")


def test_failing_item_fails_report(tmp_path):
    """[TRIVIAL] an ill-typed corpus file is reported, not raised."""
    (tmp_path / "hgv").mkdir()
    (tmp_path / "hgv" / "bad.hgv").write_text("ctx x: end!. (x, x)\n")
    (tmp_path / "hgv" / "good.hgv").write_text("ctx x: end!. x\n")
    r = verify("t1", str(tmp_path))
    assert not r.ok and [i.name for i in r.failed] == ["hgv/bad.hgv"]
    assert "LinearReused" in r.failed[0].detail
    assert r.as_dict()["ok"] is False and "1/2 passed" in r.summary()


def test_report_order_is_path_sorted(corpus_dir):
    """[TRIVIAL] items come back in path order."""
    r = verify("t3", corpus_dir)
    names = [i.name for i in r.items]
    assert names == sorted(names) and r.ok


def test_random_subjects_are_seeded(corpus_dir):
    """[TRIVIAL] random subjects are named by seed and reproducible."""
    a = verify("t1", None, random=5, seed=7)
    b = verify("t1", None, random=5, seed=7)
    assert [i.name for i in a.items] == [f"random-term-{s}" for s in range(7, 12)]
    assert [i.detail for i in a.items] == [i.detail for i in b.items]


def test_verify_all_names(corpus_dir):
    """[TRIVIAL] verify_all runs every theorem once."""
    reports = verify_all(corpus_dir, bound=50_000)
    assert [r.theorem for r in reports] == list(THEOREMS)
    assert all(r.ok for r in reports)
