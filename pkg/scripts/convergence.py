#!/usr/bin/env python3
"""Convergence data for a handful of MC checks along an n-ladder.

Writes one ``convergence__<check>.csv`` per check (columns n, abs_error,
stderr) and prints the fitted log-log slope of stderr against n, which should
sit near -1/2 for light-tailed functionals.
"""

import argparse
from pathlib import Path

import numpy as np

from poisson_ccr.config import load_config
from poisson_ccr.suites import emit_convergence

ROOT = Path(__file__).resolve().parents[1]
CHECKS = [
    "master-equation/ipi_B",
    "master-equation/one_B",
    "sigma-inner/cplx,one",
    "sigma-inner/one,one",
    "compound-laplace/gamma/t=1.0",
]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=str(ROOT / "configs" / "orthant1d.yaml"))
    p.add_argument("--ladder", type=int, nargs="+", default=[1_000, 10_000, 100_000, 1_000_000])
    p.add_argument("--out", default="results/convergence")
    p.add_argument("--checks", nargs="+", default=CHECKS)
    args = p.parse_args()

    cfg = load_config(args.config)
    for check in args.checks:
        rows = emit_convergence(cfg, check, args.ladder, out_dir=args.out)
        n, err, se = (np.array(col, dtype=float) for col in zip(*rows))
        slope = np.polyfit(np.log(n), np.log(se), 1)[0] if len(n) > 1 and np.all(se > 0) else float("nan")
        print(f"{check:32s} stderr slope {slope:+.3f}   final |err|/stderr {err[-1] / se[-1]:.2f}")


if __name__ == "__main__":
    main()
