"""Show that the CP image of recvty X. M is untypable once X occurs in the result type."""
from sessc.cp import cp_typecheck
from sessc.cpsyntax import show_process, show_prop
from sessc.errors import CheckError
from sessc.parser import parse_hgv
from sessc.sessions import show_type
from sessc.verify import cp_of, lower_pi

CASES = ("ctx c: ??X.!end!.end!. recvty X. c",
         "ctx c: ??X.!X.end!. recvty X. c")


def main() -> int:
    for src in CASES:
        m, ctx = parse_hgv(src)
        c2, m2, t = lower_pi(ctx, m)
        gamma, p, _ = cp_of(c2, m2)
        print(src)
        print(f"  HGV type: {show_type(t)}")
        print(f"  CP image: {show_process(p)}")
        print("  context: " + ", ".join(f"{x}: {show_prop(a)}" for x, a in gamma.items()))
        try:
            cp_typecheck(gamma, p)
            print("  typable")
        except CheckError as err:
            print(f"  untypable: {err}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
