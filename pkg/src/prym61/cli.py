"""Command line entry point: ``prym61 run --all | <stage>`` and ``prym61 report``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import pipeline as pl


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prym61", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run one stage or the whole pipeline")
    run.add_argument("stage", nargs="?", choices=pl.STAGES)
    run.add_argument("--all", action="store_true", help="run every stage in order")
    run.add_argument("--digits", type=int, default=1000, help="decimal precision D (CI profile: 300)")
    run.add_argument("--coeffs", type=int, default=None, help="number of q-expansion coefficients B")
    run.add_argument("--prime-bound", type=int, default=200, help="norm bound for the L-polynomial checks")
    run.add_argument("--seed", type=int, default=0, help="seed for the polarization search")
    run.add_argument("--threads", type=int, default=1, help="worker processes for point counting")
    run.add_argument("--work-dir", default="work", help="artifact directory")
    run.add_argument("--force", action="store_true", help="ignore cached artifacts")
    run.add_argument("-v", "--verbose", action="store_true")
    rep = sub.add_parser("report", help="print the table of recorded checks")
    rep.add_argument("--work-dir", default="work")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "report":
        try:
            print(pl.report(args.work_dir))
        except pl.DependencyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0
    if not args.all and args.stage is None:
        print("error: give a stage name or --all", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    os.environ.setdefault("NUMBA_NUM_THREADS", str(max(args.threads, 1)))
    cfg = pl.Config(args.digits, args.coeffs, args.prime_bound, args.seed, args.threads, args.work_dir)
    stages = pl.STAGES if args.all else (args.stage,)
    ok = True
    for s in stages:
        try:
            art = pl.run_stage(s, cfg, force=args.force)
        except (pl.DependencyError, pl.SchemaMismatchError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        tag = "cached" if art.cache_hit else f"{art.wall_time:.1f} s"
        n_fail = sum(1 for c in art.checks if not c["pass"])
        print(f"{s:9s} {tag:>10s}  {len(art.checks) - n_fail}/{len(art.checks)} checks pass  {art.hash[:12]}")
        ok = ok and art.ok
    if args.all or args.stage == "verify":
        try:
            print(pl.report(args.work_dir))
        except pl.DependencyError:
            pass
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
