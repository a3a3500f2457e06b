"""Command-line front end.

    archex explore --config run.json [--jobs N] [--out DIR] [--oracle] [--seed S] [--no-plots]
    archex oracle  --config run.json [--jobs N] [--out DIR] [--seed S]
    archex compare --method report.json --oracle report.json [--out FILE]
    archex demo    --space {low-power,high-performance} [--jobs N] [--out DIR] [--no-oracle] [--no-plots]

Exit status: 0 on success, 1 when any benchmark failed, 2 for unusable
input (bad config file, mismatched reports).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__, presets
from .config import demo_config, parse_run_config, resolve_seed
from .errors import ConfigError, MismatchedRun
from .report import comparison_table, compare_reports, load_report, run, run_oracle

log = logging.getLogger("archex")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archex", description="Threshold-bounded microarchitecture exploration.")
    parser.add_argument("--version", action="version", version=f"archex {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="run the four-phase exploration")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--oracle", action="store_true", help="also run the full exhaustive search")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("oracle", help="full exhaustive search only")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=_seed)

    p = sub.add_parser("compare", help="compare a methodology report against an oracle report")
    p.add_argument("--method", required=True, type=Path)
    p.add_argument("--oracle", required=True, type=Path)
    p.add_argument("--out", type=Path, help="write the table here instead of stdout")

    p = sub.add_parser("demo", help="run a bundled fixture space end to end")
    p.add_argument("--space", required=True, choices=presets.SPACE_NAMES)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("--no-plots", action="store_true")
    return parser


def _load(path: Path, seed):
    cfg = parse_run_config(path.read_bytes())
    return resolve_seed(cfg, seed, os.environ)


def _cmd_explore(args) -> int:
    cfg = _load(args.config, args.seed)
    if args.oracle:
        cfg = replace(cfg, oracle=True)
    return run(cfg, args.out, jobs=args.jobs, plots=not args.no_plots)


def _cmd_oracle(args) -> int:
    cfg = _load(args.config, args.seed)
    return run_oracle(cfg, args.out, jobs=args.jobs)


def _cmd_compare(args) -> int:
    pairs = compare_reports(load_report(args.method), load_report(args.oracle))
    text = comparison_table(pairs)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_FAILED if any(isinstance(s, Exception) for _, s in pairs) else EXIT_OK


def _cmd_demo(args) -> int:
    cfg = resolve_seed(demo_config(args.space, oracle=not args.no_oracle), args.seed, os.environ)
    out = args.out or Path(cfg.output_dir)
    status = run(cfg, out, jobs=args.jobs, plots=not args.no_plots)
    sys.stdout.write((out / "summary.txt").read_text(encoding="utf-8"))
    return status


COMMANDS = {"explore": _cmd_explore, "oracle": _cmd_oracle, "compare": _cmd_compare, "demo": _cmd_demo}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="archex: %(levelname)s: %(message)s", stream=sys.stderr)
    start = time.perf_counter()
    try:
        status = COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (OSError, ValueError, MismatchedRun) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    return status


if __name__ == "__main__":
    sys.exit(main())
