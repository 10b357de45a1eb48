"""Cut elimination for CP, modulo structural equivalence.

A step is found at a cut ``new x (L | R)``. The cut is first pushed down
through neighbouring cuts (``focus``) until each side is either the single
component that mentions ``x``, or the smallest subtree that mentions it
more than once. The principal rules then fire between the two sides, and
the commuting conversions move the cut under a prefix of a side that does
not act on ``x``. Reduction applies anywhere in a process.
"""
from __future__ import annotations

import heapq
import json
from collections import Counter
from dataclasses import dataclass, field

from .cpsyntax import (Bang, CaseP, Cut, EmptyIn, EmptyOut, In, Inject, InType, LinkP,
                       OfCourse, Oplus, Out, OutType, Process, Query, Tensor, Exists,
                       all_names, alpha_key, children, dual_prop, map_children,
                       rename_process, show_process, subst_process_type, subst_prop)
from .names import Name

PRINCIPAL = ("ax", "tensor-par", "plus-with", "bang-query", "weaken", "contract",
             "exists-forall", "one-bot")
COMMUTING = ("comm-out-left", "comm-out-right", "comm-in", "comm-inject", "comm-case",
             "comm-bang", "comm-query", "comm-sendtype", "comm-recvtype", "comm-bot")


@dataclass(frozen=True)
class Step:
    rule: str
    path: tuple[int, ...]
    before: Process
    after: Process
    result: Process

    @property
    def principal(self) -> bool:
        return self.rule in PRINCIPAL


# small helpers


class _Fresh:
    def __init__(self, *procs: Process):
        self.top = max((n.uid for p in procs for n in all_names(p)), default=0)

    def __call__(self, base: Name) -> Name:
        self.top += 1
        return Name(base.base, self.top)


def occurrences(p: Process, x: Name) -> int:
    """Number of free syntactic occurrences of ``x`` in ``p``."""
    if x not in p.fn:
        return 0
    match p:
        case LinkP(a, b):
            return (a == x) + (b == x)
        case Cut(y, l, r):
            return 0 if y == x else occurrences(l, x) + occurrences(r, x)
        case Out(c, y, a, b):
            return (c == x) + (0 if y == x else occurrences(a, x)) + occurrences(b, x)
        case In(c, y, k) | Bang(c, y, k) | Query(c, y, k):
            return (c == x) + (0 if y == x else occurrences(k, x))
        case EmptyOut(c):
            return int(c == x)
        case CaseP(c, bs):
            # the branches are alternatives; each uses x the same number of times
            return (c == x) + max(occurrences(b, x) for _, b in bs)
    c = p.chan
    return (c == x) + sum(occurrences(k, x) for k in children(p))


def rename_first(p: Process, x: Name, new: Name) -> Process:
    """Rename the first free occurrence of ``x`` (pre-order, left to right).

    In a case, the first occurrence is renamed in every branch.
    """
    done = [False]

    def go(q: Process) -> Process:
        if done[0] or x not in q.fn:
            return q
        match q:
            case LinkP(a, b):
                done[0] = True
                return LinkP(new, b) if a == x else LinkP(a, new)
            case EmptyOut(_):
                done[0] = True
                return EmptyOut(new)
            case CaseP(c, bs):
                if c == x:
                    done[0] = True
                    return CaseP(new, bs)
                out = []
                for l, b in bs:
                    done[0] = False
                    out.append((l, go(b)))
                done[0] = True
                return CaseP(c, tuple(out))
        if getattr(q, "chan", None) == x:
            done[0] = True
            return _with_chan(q, new)
        return map_children(q, go)

    return go(p)


def _with_chan(q: Process, c: Name) -> Process:
    match q:
        case Out(_, y, a, b):
            return Out(c, y, a, b)
        case In(_, y, k) | Bang(_, y, k) | Query(_, y, k):
            return type(q)(c, y, k)
        case Inject(_, l, k):
            return Inject(c, l, k)
        case OutType(_, a, k):
            return OutType(c, a, k)
        case InType(_, v, k):
            return InType(c, v, k)
        case EmptyIn(_, k):
            return EmptyIn(c, k)
    raise TypeError(f"no channel to replace in {q!r}")


def subterm(p: Process, path: tuple[int, ...]) -> Process:
    for i in path:
        p = children(p)[i]
    return p


def replace_at(p: Process, path: tuple[int, ...], new: Process) -> Process:
    if not path:
        return new
    i, rest = path[0], path[1:]
    counter = iter(range(len(children(p))))
    return map_children(p, lambda c: replace_at(c, rest, new) if next(counter) == i else c)


# focusing


def _descend(x: Name, s: Process):
    """Walk into ``s`` while exactly one side of a cut mentions ``x``.

    Returns the reached subprocess and a function rebuilding the cuts
    that were passed, around a replacement for it.
    """
    frames = []
    while isinstance(s, Cut):
        in_l, in_r = x in s.left.fn, x in s.right.fn
        if in_l and not in_r:
            frames.append((s, 0))
            s = s.left
        elif in_r and not in_l:
            frames.append((s, 1))
            s = s.right
        else:
            break

    def wrap(inner: Process) -> Process:
        for cut, side in reversed(frames):
            if side == 0:
                inner = Cut(cut.name, inner, cut.right, cut.ann)
            else:
                inner = Cut(cut.name, cut.left, inner, cut.ann)
        return inner

    return s, wrap


def focus(cut: Cut):
    """``(core, wrap)`` with ``wrap(core)`` structurally equal to ``cut``.

    The frames passed on each side bind names of that side only, so the
    two sets of frames can be nested in either order.
    """
    left, wrap_l = _descend(cut.name, cut.left)
    right, wrap_r = _descend(cut.name, cut.right)
    return Cut(cut.name, left, right, cut.ann), lambda c: wrap_l(wrap_r(c))


# rules at a focused cut


def _oriented(core: Cut, test):
    """Yield (a, b, ann_a) for both orientations where ``test(a)`` holds."""
    x, l, r, ann = core.name, core.left, core.right, core.ann
    if test(l):
        yield l, r, ann
    if test(r):
        yield r, l, dual_prop(ann) if ann is not None else None


def principal_steps(core: Cut, fresh: _Fresh) -> list[tuple[str, Process]]:
    x, l, r = core.name, core.left, core.right
    out: list[tuple[str, Process]] = []

    # axiom: new x (w <-> x | P) --> P{w/x}
    for a, b, _ in _oriented(core, lambda q: isinstance(q, LinkP) and x in (q.left, q.right)):
        w = a.right if a.left == x else a.left
        if w != x:
            out.append(("ax", rename_process(b, w, x)))
            break

    for a, b, ann in _oriented(core, lambda q: isinstance(q, Out) and q.chan == x):
        if isinstance(b, In) and b.chan == x:
            y = a.fresh
            r2 = rename_process(b.cont, y, b.fresh) if b.fresh != y else b.cont
            ann_y = ann_x = None
            if isinstance(ann, Tensor):
                ann_y, ann_x = ann.left, ann.right
            out.append(("tensor-par", Cut(y, a.payload, Cut(x, a.cont, r2, ann_x), ann_y)))

    for a, b, ann in _oriented(core, lambda q: isinstance(q, Inject) and q.chan == x):
        if isinstance(b, CaseP) and b.chan == x:
            branch = dict(b.branches).get(a.label)
            if branch is not None:
                new_ann = dict(ann.branches).get(a.label) if isinstance(ann, Oplus) else None
                out.append(("plus-with", Cut(x, a.cont, branch, new_ann)))

    for a, b, ann in _oriented(core, lambda q: isinstance(q, Bang) and q.chan == x):
        body_ann = ann.body if isinstance(ann, OfCourse) else None
        n = occurrences(b, x)
        if n == 0:
            out.append(("weaken", b))
        elif isinstance(b, Query) and b.chan == x and x not in b.cont.fn:
            y = a.fresh
            q2 = rename_process(b.cont, y, b.fresh) if b.fresh != y else b.cont
            out.append(("bang-query", Cut(y, a.body, q2, body_ann)))
        elif n >= 2:
            x2 = fresh(x)
            client = rename_first(b, x, x2)
            copy = _fresh_binders(Bang(x2, a.fresh, a.body), fresh)
            out.append(("contract", Cut(x, a, Cut(x2, copy, client, ann), ann)))

    for a, b, ann in _oriented(core, lambda q: isinstance(q, OutType) and q.chan == x):
        if isinstance(b, InType) and b.chan == x:
            new_ann = subst_prop(ann.body, ann.var, a.prop) if isinstance(ann, Exists) else None
            out.append(("exists-forall",
                        Cut(x, a.cont, subst_process_type(b.cont, b.var, a.prop), new_ann)))

    for a, b, _ in _oriented(core, lambda q: isinstance(q, EmptyOut) and q.chan == x):
        if isinstance(b, EmptyIn) and b.chan == x and x not in b.cont.fn:
            out.append(("one-bot", b.cont))
    return out


def _fresh_binders(p: Process, fresh: _Fresh) -> Process:
    """Give every binder of ``p`` a brand-new uid (used for duplicated copies)."""
    match p:
        case Cut(x, l, r, ann):
            x2 = fresh(x)
            return Cut(x2, _fresh_binders(rename_process(l, x2, x), fresh),
                       _fresh_binders(rename_process(r, x2, x), fresh), ann)
        case Out(c, y, a, b):
            y2 = fresh(y)
            return Out(c, y2, _fresh_binders(rename_process(a, y2, y), fresh),
                       _fresh_binders(b, fresh))
        case In(c, y, k) | Bang(c, y, k) | Query(c, y, k):
            y2 = fresh(y)
            return type(p)(c, y2, _fresh_binders(rename_process(k, y2, y), fresh))
    return map_children(p, lambda q: _fresh_binders(q, fresh))


COMM_TAGS = {In: "comm-in", Inject: "comm-inject", CaseP: "comm-case", Bang: "comm-bang",
             Query: "comm-query", OutType: "comm-sendtype", InType: "comm-recvtype",
             EmptyIn: "comm-bot"}


def commuting_steps(core: Cut, fresh: _Fresh) -> list[tuple[str, Process]]:
    x, ann = core.name, core.ann
    out: list[tuple[str, Process]] = []
    for side in (0, 1):
        a = core.left if side == 0 else core.right
        other = core.right if side == 0 else core.left
        if isinstance(a, (Cut, LinkP, EmptyOut)) or a.chan == x or x not in a.fn:
            continue

        def cut(inner: Process, rest: Process = other) -> Cut:
            return Cut(x, inner, rest, ann) if side == 0 else Cut(x, rest, inner, ann)

        match a:
            case Out(c, y, p, q):
                in_p, in_q = x in p.fn, x in q.fn
                if in_p and not in_q:
                    out.append(("comm-out-left", Out(c, y, cut(p), q)))
                elif in_q and not in_p:
                    out.append(("comm-out-right", Out(c, y, p, cut(q))))
            case In(c, y, k) | Query(c, y, k):
                out.append((COMM_TAGS[type(a)], type(a)(c, y, cut(k))))
            case Bang(c, y, k):
                # the other side must itself be a server for the result to type
                if isinstance(other, Bang) and other.chan == x:
                    out.append(("comm-bang", Bang(c, y, cut(k))))
            case Inject(c, l, k):
                out.append(("comm-inject", Inject(c, l, cut(k))))
            case OutType(c, t, k):
                out.append(("comm-sendtype", OutType(c, t, cut(k))))
            case InType(c, v, k):
                if v in _tyvars(other):
                    continue
                out.append(("comm-recvtype", InType(c, v, cut(k))))
            case EmptyIn(c, k):
                out.append(("comm-bot", EmptyIn(c, cut(k))))
            case CaseP(c, bs):
                branches = []
                for i, (l, b) in enumerate(bs):
                    rest = other if i == 0 else _fresh_binders(other, fresh)
                    branches.append((l, cut(b, rest)))
                out.append(("comm-case", CaseP(c, tuple(branches))))
    return out


def _tyvars(p: Process) -> set[str]:
    from .cpsyntax import process_tyvars
    return process_tyvars(p)


# enumeration


def _walk(p: Process, path=(), order: str = "lo"):
    """Cut positions in pre-order (``lo``) or reversed post-order (``ri``)."""
    kids = children(p)
    if order == "lo":
        if isinstance(p, Cut):
            yield p, path
        for i, k in enumerate(kids):
            yield from _walk(k, path + (i,), order)
    else:
        for i in reversed(range(len(kids))):
            yield from _walk(kids[i], path + (i,), order)
        if isinstance(p, Cut):
            yield p, path


def steps_at(p: Process, cut: Cut, path, fresh: _Fresh, kinds=("principal", "commuting")):
    core, wrap = focus(cut)
    found = []
    if "principal" in kinds:
        found += principal_steps(core, fresh)
    if "commuting" in kinds:
        found += commuting_steps(core, fresh)
    for rule, new_core in found:
        after = wrap(new_core)
        yield Step(rule, path, cut, after, replace_at(p, path, after))


def all_steps(p: Process) -> list[Step]:
    fresh = _Fresh(p)
    return [s for cut, path in _walk(p) for s in steps_at(p, cut, path, fresh)]


def find_step(p: Process, strategy: str = "lo") -> Step | None:
    """The step a strategy picks: the first principal step in its order,
    else a commuting conversion.

    Commuting conversions do not commute with each other, so their choice
    must not depend on the strategy: the first one in pre-order on the
    canonical representative of ``p`` is taken.
    """
    fresh = _Fresh(p)
    for cut, path in _walk(p, order=strategy):
        for s in steps_at(p, cut, path, fresh, ("principal",)):
            return s
    return commuting_step(canonicalize(p))


def principal_step(p: Process) -> Step | None:
    fresh = _Fresh(p)
    for cut, path in _walk(p):
        for s in steps_at(p, cut, path, fresh, ("principal",)):
            return s
    return None


def commuting_step(p: Process) -> Step | None:
    fresh = _Fresh(p)
    for cut, path in _walk(p):
        for s in steps_at(p, cut, path, fresh, ("commuting",)):
            return s
    return None


# structural equivalence


def canonicalize(p: Process) -> Process:
    """A representative of the structural-equivalence class of ``p``.

    Cut clusters whose binders each join exactly two components (a tree)
    are rebuilt in a canonical shape, so equivalent clusters agree up to
    alpha. Other clusters only have the two sides of each cut ordered.
    """
    if not isinstance(p, Cut):
        return map_children(p, canonicalize)
    comps, binders = [], []
    _flatten(p, comps, binders)
    comps = [canonicalize(c) for c in comps]
    rebuilt = _rebuild_tree(comps, binders)
    if rebuilt is not None:
        return rebuilt
    return _order_cuts(p)


def _flatten(p: Process, comps: list, binders: list) -> None:
    """Collect the components of a cut cluster, and for each binder its
    annotation with the index range of the components on its left."""
    if isinstance(p, Cut):
        start = len(comps)
        entry = [p.name, p.ann, None]
        binders.append(entry)
        _flatten(p.left, comps, binders)
        entry[2] = range(start, len(comps))
        _flatten(p.right, comps, binders)
    else:
        comps.append(p)


def _order_cuts(p: Process) -> Process:
    if not isinstance(p, Cut):
        return map_children(p, canonicalize)
    l, r = _order_cuts(p.left), _order_cuts(p.right)
    x = p.name
    kl, kr = alpha_key(l, _port_token({x})), alpha_key(r, _port_token({x}))
    if repr(kr) < repr(kl):
        return Cut(x, r, l, dual_prop(p.ann) if p.ann is not None else None)
    return Cut(x, l, r, p.ann)


def _port_token(names):
    return lambda n: ("port",) if n in names else None


def _ports(c: Process, binders: set[Name]) -> list[Name]:
    """Cluster binders free in ``c``, in order of first occurrence."""
    seen: list[Name] = []

    def go(q: Process, bound: frozenset):
        match q:
            case LinkP(a, b):
                names = [a, b]
            case Cut(y, _, _):
                bound = bound | {y}
                names = []
            case Out(ch, y, _, _):
                names = [ch]
            case In(ch, y, _) | Bang(ch, y, _) | Query(ch, y, _):
                names = [ch]
            case _:
                names = [q.chan]
        for n in names:
            if n in binders and n not in bound and n not in seen:
                seen.append(n)
        match q:
            case Out(_, y, a, b):
                go(a, bound | {y})
                go(b, bound)
                return
            case In(_, y, k) | Bang(_, y, k) | Query(_, y, k):
                go(k, bound | {y})
                return
        for k in children(q):
            go(k, bound)

    go(c, frozenset())
    return seen


def _rebuild_tree(comps: list[Process], binders: list) -> Process | None:
    names = {b for b, _, _ in binders}
    ports = [_ports(c, names) for c in comps]
    owners: dict[Name, list[int]] = {b: [] for b in names}
    for i, ps in enumerate(ports):
        for b in ps:
            owners[b].append(i)
    if any(len(v) != 2 for v in owners.values()) or len(comps) != len(names) + 1:
        return None
    # which component sits on the annotated (left) side of each binder
    ann = {}
    for b, a, left in binders:
        if a is not None:
            side = next(i for i in owners[b] if i in left)
            ann[b] = (a, side)

    keys = []
    for i, c in enumerate(comps):
        index = {b: k for k, b in enumerate(ports[i])}
        keys.append(alpha_key(c, lambda n, index=index: ("port", index[n]) if n in index
                              else None))
    is_link = [isinstance(c, LinkP) for c in comps]

    memo: dict = {}

    def enc(i: int, via: Name | None):
        k = (i, via)
        if k in memo:
            return memo[k]
        kids = []
        for b in ports[i]:
            if b == via:
                continue
            j = owners[b][0] if owners[b][1] == i else owners[b][1]
            kids.append((enc(j, b), b, j))
        if is_link[i]:
            kids.sort(key=lambda t: repr(t[0]))
            via_ix = 0
        else:
            via_ix = ports[i].index(via) if via is not None else -1
        out = ((keys[i], via_ix, tuple(t[0] for t in kids)), kids)
        memo[k] = out
        return out

    def build(i: int, via: Name | None) -> Process:
        acc = comps[i]
        members = {i}
        for key, b, j in enc(i, via)[1]:
            sub, sub_members = build(j, b)
            a = None
            if b in ann:
                prop, side = ann[b]
                a = prop if side in members else dual_prop(prop)
            acc = Cut(b, acc, sub, a)
            members |= sub_members
        return acc, members

    root = min(range(len(comps)), key=lambda i: repr(enc(i, None)[0]))
    return build(root, None)[0]


def canonical_key(p: Process) -> tuple:
    return alpha_key(canonicalize(p))


def equiv(p: Process, q: Process) -> bool:
    """Structural equivalence up to alpha (see ``canonicalize``)."""
    return p == q or canonical_key(p) == canonical_key(q)


# traces and normalization


@dataclass
class TraceEntry:
    rule: str
    path: tuple[int, ...]
    before: Process
    after: Process

    def as_dict(self) -> dict:
        return {"rule": self.rule, "path": list(self.path),
                "before": show_process(self.before), "after": show_process(self.after)}


@dataclass
class RewriteTrace:
    start: Process
    entries: list[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def rules(self) -> Counter:
        return Counter(e.rule for e in self.entries)

    def to_text(self) -> str:
        lines = [f"start: {show_process(self.start)}"]
        for i, e in enumerate(self.entries, 1):
            where = ".".join(map(str, e.path)) or "root"
            lines.append(f"{i}\t{e.rule}\t@{where}\t{show_process(e.before)}"
                         f"\t-->\t{show_process(e.after)}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"start": show_process(self.start),
                           "steps": [e.as_dict() for e in self.entries]}, indent=2)


class StepLimitExceeded(Exception):
    def __init__(self, limit: int, trace: RewriteTrace, last: Process):
        super().__init__(f"no normal form within {limit} steps")
        self.limit = limit
        self.trace = trace
        self.last = last


@dataclass
class NormalizeResult:
    process: Process
    trace: RewriteTrace
    violations: list[str] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.trace)


def normalize(p: Process, max_steps: int = 10_000, strategy: str = "lo",
              audit_ctx: dict | None = None) -> NormalizeResult:
    """Reduce until no rule applies.

    ``strategy`` is ``lo`` (leftmost-outermost) or ``ri`` (rightmost-innermost);
    both prefer principal steps. With ``audit_ctx`` every intermediate process
    is re-typechecked against that context and failures are recorded.
    """
    from .cp import cp_typecheck, check_sequent_eq
    from .errors import CheckError

    trace = RewriteTrace(p)
    violations: list[str] = []
    current = p
    for i in range(max_steps + 1):
        step = find_step(current, strategy)
        if step is None:
            return NormalizeResult(current, trace, violations)
        if i == max_steps:
            raise StepLimitExceeded(max_steps, trace, current)
        trace.entries.append(TraceEntry(step.rule, step.path, step.before, step.after))
        current = step.result
        if audit_ctx is not None:
            try:
                d = cp_typecheck(audit_ctx, current)
                if not check_sequent_eq(d):
                    violations.append(f"step {i + 1} ({step.rule}): derivation does not recheck")
            except CheckError as err:
                violations.append(f"step {i + 1} ({step.rule}): {err}")
    raise AssertionError("unreachable")


# reachability


def _profile(p: Process) -> Counter:
    """Constructor counts, prefix orderings and a signature per cut of what its two sides do."""
    out: Counter = Counter()
    stack = [p]
    while stack:
        q = stack.pop()
        out[type(q).__name__] += 1
        if not isinstance(q, Cut):
            for c in children(q):
                out[(type(q).__name__, type(c).__name__)] += 1
        if isinstance(q, Cut):
            core, _ = focus(q)
            out[("cut", *sorted((_head(core.left, q.name), _head(core.right, q.name))))] += 1
        stack.extend(children(q))
    return out


def _head(q: Process, x: Name) -> str:
    if isinstance(q, LinkP):
        return "link"
    if isinstance(q, Cut):
        return "net"
    return type(q).__name__ + ("@x" if q.chan == x else "")


def _distance(a: Counter, b: Counter) -> int:
    # a cut the goal still needs is expensive to rebuild, so weigh it heavily
    missing = b - a
    lost = sum(n for k, n in missing.items() if isinstance(k, tuple) and k[0] == "cut")
    return sum(((a - b) + missing).values()) + 8 * lost


@dataclass
class ReachResult:
    found: bool
    exhausted: bool
    explored: int
    path: list[Step] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.found:
            return "found"
        return "not-found" if self.exhausted else "bound-reached"


def reaches(p: Process, q: Process, bound: int = 50_000) -> ReachResult:
    """Search for ``p -->* q`` modulo structural equivalence.

    Best-first over distinct states (by canonical key), guided by how far a
    state's constructor and cut profile is from ``q``. ``exhausted`` means
    every reduct of ``p`` was seen, so ``q`` is not reachable; otherwise the
    search stopped at ``bound`` states.

    When ``q`` has no cut against an axiom, axiom cuts are contracted
    eagerly: such a cut must vanish on any path to ``q`` and its reduct
    commutes with every other step, so only one ordering is explored.
    """
    target = canonical_key(q)
    goal = _profile(q)
    eager_ax = not any(k[0] == "cut" and "link" in k for k in goal if isinstance(k, tuple))
    start = canonical_key(p)
    if start == target:
        return ReachResult(True, False, 1)
    seen = {start: None}
    parents: dict = {}
    counter = 0
    heap = [(_distance(_profile(p), goal), 0, counter, p, start)]
    while heap:
        _, depth, _, cur, key = heapq.heappop(heap)
        depth = -depth
        steps = all_steps(cur)
        if eager_ax:
            steps = next(([s] for s in steps if s.rule == "ax"), steps)
        for step in steps:
            k = canonical_key(step.result)
            if k in seen:
                continue
            seen[k] = key
            parents[k] = (key, step)
            if k == target:
                return ReachResult(True, False, len(seen), _path(parents, k, start))
            if len(seen) >= bound:
                return ReachResult(False, False, len(seen))
            counter += 1
            prof = _profile(step.result)
            heapq.heappush(heap, (_distance(prof, goal), -(depth + 1), counter, step.result, k))
    return ReachResult(False, True, len(seen))


def _path(parents: dict, k, start) -> list[Step]:
    out = []
    while k != start:
        k, step = parents[k]
        out.append(step)
    return out[::-1]
