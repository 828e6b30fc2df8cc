"""Command line: ``artifact check`` explores a benchmark, ``artifact lincheck`` checks one history."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import BENCHMARKS
from .exploration import DEFAULT_CUTOFF
from .history import load_history
from .lincheck import LinCheckError, SequentialSpec, wgl_check
from .report import RunConfig, emit_report, run, run_once
from .schedulers import ALL_KINDS

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_FOUND = 3


def _schedulers(text: str) -> list[str]:
    if text.lower() == "all":
        return list(ALL_KINDS)
    names = [s.strip().upper() for s in text.split(",") if s.strip()]
    valid = set(ALL_KINDS)
    bad = [n for n in names if n not in valid]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown scheduler(s): {', '.join(bad) or text!r}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description="Model-check actor systems for linearizability.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="explore a benchmark and check its histories")
    check.add_argument("--benchmark", required=True, choices=sorted(BENCHMARKS))
    check.add_argument("--harness", help="bundled harness name or path to a harness file")
    check.add_argument("--scheduler", type=_schedulers, default=["EX"], help="EX|SR|DB|DP|TD|IR|LV, a comma list, or 'all'")
    check.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--delay-budget", type=int, default=2)
    check.add_argument("--reps", type=int, default=3)
    check.add_argument("--emit", choices=("csv", "json"), default="csv")
    check.add_argument("--output", help="write the report here instead of stdout")
    check.add_argument(
        "--dump-schedules",
        metavar="PATH",
        help="write every explored schedule of the first repetition as JSON",
    )

    lin = sub.add_parser("lincheck", help="check a history file")
    lin.add_argument("file")
    lin.add_argument("--spec", choices=("MAP", "SET"), help="overrides the ADT named in the file")
    lin.add_argument("--default", type=json.loads, help="value of an unwritten key (JSON)")
    lin.add_argument("--per-key", action="store_true", help="check each key separately")
    return parser


def _check(args: argparse.Namespace) -> int:
    if args.cutoff < 1 or args.reps < 1:
        print("error: --cutoff and --reps must be positive", file=sys.stderr)
        return EXIT_INPUT
    results = []
    dumps = []
    for kind in args.scheduler:
        config = RunConfig(
            benchmark=args.benchmark,
            harness=args.harness,
            scheduler=kind,
            cutoff=args.cutoff,
            seed=args.seed,
            reps=args.reps,
            delay_budget=args.delay_budget,
        )
        try:
            if args.dump_schedules:
                _, rep = run_once(config, keep_schedules=True)
                dumps.append(rep.to_json(include_schedules=True))
            results.append(run(config))
        except (FileNotFoundError, KeyError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    text = emit_report(results, args.emit, args.output)
    if args.output is None:
        sys.stdout.write(text)
    if args.dump_schedules:
        Path(args.dump_schedules).write_text(json.dumps(dumps, indent=1))
    return EXIT_FOUND if any(m.NL > 0 for m in results) else EXIT_OK


def _lincheck(args: argparse.Namespace) -> int:
    try:
        history, adt, default = load_history(Path(args.file).read_text())
        spec = SequentialSpec(args.spec or adt, default if args.default is None else args.default)
        out = wgl_check(history, spec, per_key=args.per_key)
    except (OSError, ValueError, KeyError, TypeError, LinCheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if out.linearizable:
        print("linearizable: " + " ".join(str(i) for i in out.witness or ()))
        return EXIT_OK
    print("not linearizable")
    return EXIT_VIOLATION


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return _check(args)
    return _lincheck(args)


if __name__ == "__main__":
    sys.exit(main())
