#!/usr/bin/env python3
"""Run every suite on every shipped config and print a one-line summary per suite.

    python scripts/run_all.py [--out results] [--workers 2] [--configs configs/*.yaml]
"""

import argparse
import sys
import time
from pathlib import Path

from poisson_ccr.config import load_config
from poisson_ccr.suites import SUITES, run_suite

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--configs", nargs="+", default=sorted(str(c) for c in (ROOT / "configs").glob("*.yaml")))
    args = p.parse_args()

    failed = []
    t0 = time.perf_counter()
    for path in args.configs:
        cfg = load_config(path)
        out = Path(args.out) / Path(path).stem
        for name in SUITES:
            rep = run_suite(cfg, name, out_dir=out, workers=args.workers)
            mc = [abs(r.z) for r in rep.rows if r.kind == "mc"]
            zmax = f"max|z|={max(mc):5.2f}" if mc else "exact"
            print(f"{Path(path).stem:10s} {name:17s} {'PASS' if rep.passed else 'FAIL'} {len(rep.rows):4d} rows  {zmax}")
            if not rep.passed:
                failed.append((path, name))
    print(f"total {time.perf_counter() - t0:.1f}s; CSVs under {args.out}/")
    for path, name in failed:
        print(f"FAILED: {path} {name}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
