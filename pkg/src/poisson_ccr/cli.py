"""Command line entry point: ``poisson-ccr run | list-suites | emit-convergence``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .suites import SUITES, emit_convergence, run_suite

log = logging.getLogger("poisson_ccr")

DEFAULT_LADDER = (1_000, 10_000, 100_000, 1_000_000)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poisson-ccr", description="Poisson product systems vs CCR flows: verification runner")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run verification suites from a config file")
    run.add_argument("config")
    run.add_argument("--suite", action="append", choices=list(SUITES), help="suite to run (repeatable; default all)")
    run.add_argument("--out", help="output directory (default: config output_dir, $POISSON_CCR_OUT, ./out)")
    run.add_argument("--workers", type=int, help="threads for MC replicates (results do not depend on this)")

    sub.add_parser("list-suites", help="print the available suite names")

    conv = sub.add_parser("emit-convergence", help="rerun one MC check along an n-ladder")
    conv.add_argument("config")
    conv.add_argument("check_id")
    conv.add_argument("--ladder", type=int, nargs="+", default=list(DEFAULT_LADDER))
    conv.add_argument("--out")
    conv.add_argument("--workers", type=int)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")

    if args.command == "list-suites":
        for name in SUITES:
            print(name)
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = cfg.resolve_output_dir(args.out)

    if args.command == "emit-convergence":
        try:
            rows = emit_convergence(cfg, args.check_id, args.ladder, out_dir=out, workers=args.workers)
        except (KeyError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print("n,abs_error,stderr")
        for n, err, se in rows:
            print(f"{n},{err:.6g},{se:.6g}")
        return 0

    suites = args.suite or list(SUITES)
    all_ok = True
    for name in suites:
        try:
            report = run_suite(cfg, name, out_dir=out, workers=args.workers)
        except ValueError as exc:
            print(f"{name}: error: {exc}", file=sys.stderr)
            return 2
        status = "PASS" if report.passed else "FAIL"
        log.info("%-17s %s  %3d rows  %6.2fs", name, status, len(report.rows), report.duration)
        for row in report.failures():
            log.info("    failed %s: value=%s target=%s z=%.3g", row.check_id, row.value, row.target, row.z)
        all_ok &= report.passed
    log.info("reports written to %s", out)
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
