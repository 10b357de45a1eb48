"""Normalize generated processes under both strategies and compare the normal forms."""
import argparse
import time
from collections import Counter
from dataclasses import asdict, dataclass

from sessc.cpsyntax import show_process
from sessc.engine import equiv, normalize
from sessc.gen import GenConfig, gen_typed_process


@dataclass
class Config:
    count: int = 200
    seed: int = 0
    depth: int = 4


def main(cfg: Config) -> int:
    t0 = time.perf_counter()
    rules: Counter = Counter()
    disagree = 0
    for s in range(cfg.seed, cfg.seed + cfg.count):
        _, p = gen_typed_process(GenConfig(seed=s, max_depth=cfg.depth, calculus="cp"))
        lo, ri = normalize(p, strategy="lo"), normalize(p, strategy="ri")
        rules.update(lo.trace.rules())
        if not equiv(lo.process, ri.process):
            disagree += 1
            print(f"seed {s}: {show_process(lo.process)}  vs  {show_process(ri.process)}")
    secs = time.perf_counter() - t0
    print(f"{cfg.count - disagree}/{cfg.count} agree in {secs:.2f}s")
    print("rule use:", ", ".join(f"{r}={n}" for r, n in sorted(rules.items())))
    return 0 if disagree == 0 else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, default in asdict(Config()).items():
        ap.add_argument(f"--{f}", type=int, default=default)
    raise SystemExit(main(Config(**vars(ap.parse_args()))))
