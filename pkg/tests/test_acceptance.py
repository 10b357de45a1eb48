"""Acceptance criteria; each test records one PASS/FAIL line shown in the terminal summary."""
import dataclasses
import time

import pytest

from reduction_cases import CASES, run_case
from sessc.cpsyntax import dual_prop
from sessc.engine import equiv, normalize
from sessc.gen import GenConfig, gen_prop, gen_session_type, gen_typed_process
from sessc.parser import load
from sessc.sessions import dual
from sessc.translate import tr_type_cp, tr_type_gv
from sessc.verify import corpus_files, verify

from conftest import CORPUS

N_TYPES = 1000
N_RANDOM = 500
BOUND = 50_000


def depth(t) -> int:
    kids = [v for f in dataclasses.fields(t) for v in _flat(getattr(t, f.name))
            if dataclasses.is_dataclass(v) and not type(v).__name__.endswith("Var")]
    return 1 + max((depth(k) for k in kids), default=-1)


def _flat(v):
    if isinstance(v, tuple):
        for x in v:
            yield from _flat(x)
    else:
        yield v


@pytest.fixture(scope="module")
def samples():
    types = [gen_session_type(GenConfig(seed=s, max_depth=6)) for s in range(N_TYPES)]
    props = [gen_prop(GenConfig(seed=s, max_depth=6, calculus="cp")) for s in range(N_TYPES)]
    return types, props


@pytest.fixture(scope="module")
def reports():
    """Harness reports, each timed; shared by the subject-reduction criterion."""
    out = {}
    for th, random in (("t1", N_RANDOM), ("t2", N_RANDOM), ("t3", N_RANDOM),
                       ("factor", 0), ("soundness", 0)):
        t0 = time.perf_counter()
        r = verify(th, CORPUS, random=random, seed=0, bound=BOUND)
        out[th] = (r, time.perf_counter() - t0)
    return out


def test_duality_involutions(samples, record):
    """[DERIVED] dual(dual x) = x on 1,000 types and 1,000 propositions of depth at most 6."""
    types, props = samples
    t0 = time.perf_counter()
    bad = sum(dual(dual(s)) != s for s in types) + sum(dual_prop(dual_prop(a)) != a for a in props)
    secs = time.perf_counter() - t0
    deep = max(max(map(depth, types)), max(map(depth, props)))
    ok = bad == 0 and deep <= 6 and secs < 1
    assert record("duality involutions", ok,
                  f"{2 * N_TYPES - bad}/{2 * N_TYPES} exact, max depth {deep}, {secs:.3f}s")


def test_naturality_and_round_trips(samples, record):
    """[DERIVED] the type translations commute with duality and invert each other."""
    types, props = samples
    t0 = time.perf_counter()
    bad = 0
    for s in types:
        bad += tr_type_cp(dual(s)) != dual_prop(tr_type_cp(s))
        bad += tr_type_gv(tr_type_cp(s)) != s
    for a in props:
        bad += tr_type_gv(dual_prop(a)) != dual(tr_type_gv(a))
        bad += tr_type_cp(tr_type_gv(a)) != a
    secs = time.perf_counter() - t0
    total = 4 * N_TYPES
    assert record("duality naturality and type round trips", bad == 0 and secs < 1,
                  f"{total - bad}/{total} exact, {secs:.3f}s")


def _check(reports, record, key, label, limit):
    r, secs = reports[key]
    n = len(r.items)
    ok = r.ok and secs < limit
    detail = f"{n - len(r.failed)}/{n} passed, {secs:.2f}s (limit {limit}s)"
    if r.failed:
        detail += f"; first failure {r.failed[0].name}: {r.failed[0].detail[:200]}"
    return record(label, ok, detail), n


def test_t1_lowering_preserves_typing(reports, record):
    """[DERIVED] lowering to HGVpi preserves typing on the corpus plus 500 terms."""
    ok, n = _check(reports, record, "t1", "t1: HGV to HGVpi preserves typing", 10)
    assert ok and n >= 30 + N_RANDOM


def test_t2_cp_image_typed(reports, record):
    """[DERIVED] the CP image is well typed on the corpus plus 500 terms."""
    ok, n = _check(reports, record, "t2", "t2: HGVpi to CP preserves typing", 10)
    assert ok and n >= 30 + N_RANDOM


def test_t3_lift_typed(reports, record):
    """[DERIVED] lifting CP to HGVpi gives end! on the corpus plus 500 processes."""
    ok, n = _check(reports, record, "t3", "t3: CP to HGVpi preserves typing", 10)
    assert ok and n >= 30 + N_RANDOM


def test_factoring(reports, record):
    """[DERIVED] the factored image reaches the direct image within 50,000 states."""
    ok, n = _check(reports, record, "factor", "factoring", 300)
    assert ok and n >= 10


def test_soundness(reports, record):
    """[DERIVED] the CP round trip of every corpus process reaches it again."""
    ok, n = _check(reports, record, "soundness", "round-trip soundness", 300)
    assert ok and n == len(corpus_files(CORPUS, "cp"))


def test_subject_reduction(reports, record):
    """[DERIVED] no audited step breaks typing, in the harness runs and on the corpus."""
    violations = sum(reports[k][0].violations for k in ("factor", "soundness"))
    steps = 0
    for path in corpus_files(CORPUS, "cp"):
        src = load(path)
        r = normalize(src.subject, audit_ctx=src.context)
        violations += len(r.violations)
        steps += r.steps
    unaudited = sum("not audited" in i.detail for i in reports["soundness"][0].items)
    detail = (f"{violations} violations; corpus normalization audited {steps} steps; "
              f"{unaudited} round-trip starts untypable and not audited")
    assert record("subject reduction", violations == 0, detail)


def test_reduction_rules(record):
    """[DERIVED] golden single-step tests for 8 principal rules and 10 commuting conversions."""
    t0 = time.perf_counter()
    passed = sum(run_case(c) == (c[0], True, True) for c in CASES)
    secs = time.perf_counter() - t0
    ok = passed == len(CASES) == 18 and secs < 1
    assert record("reduction-rule unit suite", ok, f"{passed}/{len(CASES)} passed, {secs:.3f}s")


def test_confluence(record):
    """[DERIVED] two strategies give equivalent normal forms on 200 generated processes."""
    t0 = time.perf_counter()
    agree = 0
    for s in range(200):
        _, p = gen_typed_process(GenConfig(seed=s, max_depth=4, calculus="cp"))
        agree += equiv(normalize(p, strategy="lo").process, normalize(p, strategy="ri").process)
    secs = time.perf_counter() - t0
    assert record("confluence sample", agree == 200 and secs < 60,
                  f"{agree}/200 agree, {secs:.2f}s")
