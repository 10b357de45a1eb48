"""Run every theorem check on the corpus plus generated subjects and write a JSON report."""
import argparse
import json
import time
from dataclasses import asdict, dataclass

from sessc.verify import THEOREMS, verify


@dataclass
class Config:
    corpus: str = "corpus"
    random: int = 500
    seed: int = 0
    bound: int = 50_000
    out: str = "verify_report.json"


def main(cfg: Config) -> int:
    results = []
    for th in THEOREMS:
        t0 = time.perf_counter()
        r = verify(th, cfg.corpus, cfg.random, cfg.seed, cfg.bound)
        secs = time.perf_counter() - t0
        print(f"{r.summary()} (wall {secs:.2f}s)")
        for item in r.failed:
            print(f"  FAIL {item.name}: {item.detail}")
        results.append({**r.as_dict(), "wall_seconds": round(secs, 3)})
    with open(cfg.out, "w") as fh:
        json.dump({"config": asdict(cfg), "reports": results}, fh, indent=2)
    return 0 if all(r["ok"] for r in results) else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, default in asdict(Config()).items():
        ap.add_argument(f"--{f}", type=type(default), default=default)
    raise SystemExit(main(Config(**vars(ap.parse_args()))))
