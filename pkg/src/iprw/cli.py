"""Command line entry point: ``iprw renewal|simulate|verify <id>|flt|report|run``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, bundled_config, load_config
from .harness import EXIT_SCHEMA, THEOREMS, run, summary_text

VERIFY_IDS = ("all", "audit", *THEOREMS)


def _resolve_config(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    return bundled_config(name)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="config file, or the name of a bundled config")
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--workers", type=int, default=None, help="worker processes for replicates")
    common.add_argument("--out", default=None, help="output directory (overrides the config)")

    ap = argparse.ArgumentParser(prog="iprw", description="Iterated perturbed random walks: "
                                 "grids, simulation and verification reports.")
    ap.add_argument("--version", action="version", version=f"iprw {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("renewal", parents=[common], help="U, V, V_j grids and bound audit")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo generation counts")
    v = sub.add_parser("verify", parents=[common], help="run one theorem check (or all)")
    v.add_argument("theorem", choices=VERIFY_IDS)
    sub.add_parser("flt", parents=[common], help="functional limit check at the config's u_points")
    sub.add_parser("run", parents=[common], help="run the task named in the config")
    r = sub.add_parser("report", help="print the reports of a finished run")
    r.add_argument("--out", required=True, help="output directory of a finished run")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report":
        try:
            print(summary_text(args.out))
        except OSError as exc:
            print(f"iprw: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        return 0
    try:
        cfg = load_config(_resolve_config(args.config))
    except ConfigError as exc:
        print(f"iprw: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    task, theorems = None, None
    if args.command in ("renewal", "simulate", "flt"):
        task = args.command
    elif args.command == "verify":
        task = "verify-all"
        theorems = None if args.theorem == "all" else [args.theorem]
    manifest, code = run(cfg, out=args.out, seed=args.seed, workers=args.workers,
                         task=task, theorems=theorems)
    for name, verdict in manifest.verdicts.items():
        print(f"{verdict:>12}  {name}")
    if code and not manifest.verdicts:
        print(f"iprw: run aborted (exit {code}); see log above", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
