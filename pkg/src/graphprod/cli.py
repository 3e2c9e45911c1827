"""Command line entry point.

    graphprod run --config configs/default.yaml [--suite ID ...] [--seed N] [--out reports/run.jsonl]
    graphprod enumerate --config configs/default.yaml --what {words,cliques,T,S_w,C_gamma} [--word "0 1"]

``run`` exits with status 0 when every check passes, 1 when some check fails and 2 when
the configuration is rejected.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from graphprod.config import SUITES, ConfigError, load_config
from graphprod.fock import ResourceGuardError
from graphprod.suites import enumerate_text, run

ENUMERATIONS = ("words", "cliques", "T", "S_w", "C_gamma")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphprod", description="Graph product multiplier workbench.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run verification suites")
    r.add_argument("--config", required=True)
    r.add_argument("--suite", action="append", choices=SUITES, help="suite id (repeatable)")
    r.add_argument("--no-suites", action="store_true", help="run an empty suite list")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="JSON-lines report path; text and timings go next to it")
    r.add_argument("--quiet", action="store_true", help="print only the summary line")
    e = sub.add_parser("enumerate", help="dump combinatorial data of the configured graph")
    e.add_argument("--config", required=True)
    e.add_argument("--what", required=True, choices=ENUMERATIONS)
    e.add_argument("--word", help="letters of a single word for S_w, e.g. '0 1'")
    return p


def _write(path: str | None, text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.no_suites:
        cfg = cfg.with_suites([])
    elif args.suite:
        cfg = cfg.with_suites(args.suite)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report = run(cfg)
    jsonl_path = args.out or cfg.output.jsonl
    text_path = cfg.output.text
    if args.out:
        text_path = str(Path(args.out).with_suffix(".txt"))
    _write(jsonl_path, report.jsonl())
    _write(text_path, report.text())
    if jsonl_path:
        _write(str(Path(jsonl_path).with_suffix(".timings.json")), json.dumps(report.timings(), indent=1) + "\n")
    if args.quiet:
        print(f"overall: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks)")
    else:
        sys.stdout.write(report.text())
    return 0 if report.passed else 1


def cmd_enumerate(args) -> int:
    cfg = load_config(args.config)
    word = None
    if args.word is not None:
        try:
            word = tuple(int(x) for x in args.word.replace(",", " ").split())
        except ValueError:
            raise ConfigError("--word", f"expected vertex ids, got {args.word!r}") from None
        if any(not 0 <= x < cfg.graph.vertex_count for x in word):
            raise ConfigError("--word", f"letters must lie in 0..{cfg.graph.vertex_count - 1}")
    sys.stdout.write(enumerate_text(cfg, args.what, word))
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_enumerate(args)
    except (ConfigError, ResourceGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
