"""The ``sessc`` command-line driver.

Exit codes: 0 success, 1 check or verification failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .cp import cp_typecheck
from .cpsyntax import show_process, show_prop
from .engine import StepLimitExceeded, normalize, reaches
from .errors import CheckError, ParseError
from .hgv import check_pi, typecheck
from .parser import load, parse_type
from .sessions import show_type, type_eq
from .terms import show_term
from .verify import THEOREMS, cp_of, hgv_of, lower_pi, verify

OK, FAIL, USAGE = 0, 1, 2


class Failure(Exception):
    """A check that ran to completion and said no."""

    def __init__(self, message: str, data: dict | None = None):
        super().__init__(message)
        self.data = data or {}


def _ctx_text(ctx: dict, show) -> str:
    return ", ".join(f"{x}: {show(a)}" for x, a in ctx.items())


def _load(path: str, calculus: str):
    src = load(path)
    if src.calculus != calculus:
        raise ParseError(f"expected a .{calculus} file", 1, 1)
    return src


# commands; each returns (text, data) or raises Failure


def cmd_hgv_check(args):
    src = _load(args.file, "hgv")
    t, _ = typecheck(src.context, src.subject)
    data = {"file": args.file, "type": show_type(t)}
    if src.expected is not None and not type_eq(t, parse_type(src.expected)):
        raise Failure(f"type {show_type(t)} does not match expected {src.expected}", data)
    if args.pi:
        pi = check_pi(src.subject, t)
        data["pi"] = pi.ok
        if not pi:
            raise Failure(f"not in the session-typed fragment: {pi.offender}", data)
    return show_type(t), data


def cmd_hgv_lower(args):
    src = _load(args.file, "hgv")
    ctx, m = src.context, src.subject
    if args.target == "pi":
        c2, m2, t2 = lower_pi(ctx, m)
        text = show_term(m2)
        return text, {"file": args.file, "term": text, "type": show_type(t2),
                      "context": {str(x): show_type(t) for x, t in c2.items()}}
    if not args.direct:
        ctx, m, _ = lower_pi(ctx, m)
    gamma, p, z = cp_of(ctx, m, direct=args.direct)
    text = show_process(p)
    return text, {"file": args.file, "process": text, "channel": str(z),
                  "context": {str(x): show_prop(a) for x, a in gamma.items()}}


def cmd_cp_check(args):
    src = _load(args.file, "cp")
    cp_typecheck(src.context, src.subject)
    text = f"{show_process(src.subject)} |- {_ctx_text(src.context, show_prop)}"
    return text, {"file": args.file, "process": show_process(src.subject),
                  "context": {str(x): show_prop(a) for x, a in src.context.items()}}


def cmd_cp_normalize(args):
    src = _load(args.file, "cp")
    audit = None
    if args.audit:
        cp_typecheck(src.context, src.subject)
        audit = src.context
    try:
        r = normalize(src.subject, args.max_steps, audit_ctx=audit)
    except StepLimitExceeded as err:
        raise Failure(str(err), {"file": args.file, "steps": len(err.trace),
                                 "last": show_process(err.last)})
    nf = show_process(r.process)
    data = {"file": args.file, "normal_form": nf, "steps": r.steps,
            "rules": dict(r.trace.rules())}
    if args.trace:
        data["trace"] = json.loads(r.trace.to_json())
    if args.audit:
        data["violations"] = r.violations
    text = (r.trace.to_text() + "\n" if args.trace else "") + nf
    if r.violations:
        raise Failure(text + "\n" + "\n".join(r.violations), data)
    return text, data


def cmd_cp_reaches(args):
    p = _load(args.source, "cp").subject
    q = _load(args.target, "cp").subject
    r = reaches(p, q, args.bound)
    data = {"from": args.source, "to": args.target, "status": r.status,
            "explored": r.explored,
            "path": [{"rule": s.rule, "path": list(s.path)} for s in r.path]}
    text = f"{r.status} ({r.explored} states)"
    if r.found:
        text += "".join(f"\n{i}\t{s.rule}" for i, s in enumerate(r.path, 1))
        return text, data
    raise Failure(text, data)


def cmd_lift(args):
    src = _load(args.file, "cp")
    phi, m = hgv_of(src.context, src.subject)
    text = show_term(m)
    return text, {"file": args.file, "term": text,
                  "context": {str(x): show_type(t) for x, t in phi.items()}}


def cmd_verify(args):
    names = THEOREMS if args.theorem == "all" else (args.theorem,)
    reports = [verify(t, args.corpus, args.random, args.seed, args.bound) for t in names]
    text = "\n".join(r.to_text() for r in reports)
    data = {"ok": all(r.ok for r in reports), "reports": [r.as_dict() for r in reports]}
    if not data["ok"]:
        raise Failure(text, data)
    return text, data


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sessc", description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true", help="structured output")
    sub = ap.add_subparsers(dest="command", required=True)

    hgv = sub.add_parser("hgv").add_subparsers(dest="action", required=True)
    p = hgv.add_parser("check", help="typecheck an HGV file")
    p.add_argument("--pi", action="store_true", help="also require the session-typed fragment")
    p.add_argument("file")
    p.set_defaults(fn=cmd_hgv_check)
    p = hgv.add_parser("lower", help="translate to HGVpi or CP")
    p.add_argument("target", choices=("pi", "cp"))
    p.add_argument("--direct", action="store_true", help="translate to CP in one step")
    p.add_argument("file")
    p.set_defaults(fn=cmd_hgv_lower)

    cp = sub.add_parser("cp").add_subparsers(dest="action", required=True)
    p = cp.add_parser("check", help="typecheck a CP file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_cp_check)
    p = cp.add_parser("normalize", help="eliminate cuts")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--audit", action="store_true", help="re-typecheck after every step")
    p.add_argument("file")
    p.set_defaults(fn=cmd_cp_normalize)
    p = cp.add_parser("reaches", help="search for a reduction sequence")
    p.add_argument("source", metavar="FROM")
    p.add_argument("target", metavar="TO")
    p.add_argument("--bound", type=int, default=50_000)
    p.set_defaults(fn=cmd_cp_reaches)

    p = sub.add_parser("lift", help="translate a CP file to HGVpi")
    p.add_argument("file")
    p.set_defaults(fn=cmd_lift)

    p = sub.add_parser("verify", help="check the translation theorems")
    p.add_argument("theorem", choices=THEOREMS + ("all",))
    p.add_argument("--corpus", default="corpus")
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=int, default=50_000)
    p.set_defaults(fn=cmd_verify)
    return ap


def _emit(args, status: str, text: str, data: dict, stream) -> None:
    if args.json:
        print(json.dumps({"status": status, **data}, indent=2), file=sys.stdout)
    else:
        print(text, file=stream)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return USAGE if err.code else OK
    try:
        text, data = args.fn(args)
    except Failure as err:
        _emit(args, "fail", str(err), err.data, sys.stdout)
        return FAIL
    except CheckError as err:
        _emit(args, "fail", str(err), {"error": str(err), "kind": err.kind}, sys.stderr)
        return FAIL
    except (ParseError, OSError) as err:
        _emit(args, "error", f"error: {err}", {"error": str(err)}, sys.stderr)
        return USAGE
    _emit(args, "ok", text, data, sys.stdout)
    return OK


if __name__ == "__main__":
    sys.exit(main())
