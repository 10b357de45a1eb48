"""Which reduction rules do the factoring and soundness witnesses use?

Tallies rule tags over the reduction sequences found by the harness, to see
whether commuting conversions are ever needed.
"""
import argparse
from collections import Counter

from sessc.engine import COMMUTING
from sessc.verify import verify


def main(corpus: str, bound: int) -> int:
    for th in ("factor", "soundness"):
        r = verify(th, corpus, bound=bound)
        total: Counter = Counter()
        needs_comm = []
        for item in r.items:
            total.update(item.rules)
            if any(rule in COMMUTING for rule in item.rules):
                needs_comm.append(item.name)
        print(r.summary())
        print("  rules:", ", ".join(f"{k}={v}" for k, v in sorted(total.items())))
        print(f"  witnesses using a commuting conversion: {len(needs_comm)}/{len(r.items)}")
        for name in needs_comm:
            print(f"    {name}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default="corpus")
    ap.add_argument("--bound", type=int, default=50_000)
    raise SystemExit(main(**vars(ap.parse_args())))
