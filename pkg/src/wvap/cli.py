"""Command-line harness: ``wvap run | sweep | potent``.

Exit codes: 0 success, 2 usage or configuration error, 1 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .demos import DEMOS
from .errors import InvalidConfig
from .records import RunRecord, to_csv, to_json
from .search import MAX_QUBITS, U64_MAX, SearchConfig, run_grover, run_wvap


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def make_record(n: int, y: int, w: int, trials: int, seed: int) -> RunRecord:
    config = SearchConfig(n=n, y=y, w=w, seed=seed, trials=trials)
    return RunRecord.from_results(run_wvap(config), run_grover(n, y))


def cmd_run(args: argparse.Namespace) -> str:
    rec = make_record(args.n, args.target, args.w, args.trials, args.seed)
    return to_json(rec) if args.format == "json" else to_csv([rec])


def cmd_sweep(args: argparse.Namespace) -> str:
    if not 1 <= args.n_min <= args.n_max <= MAX_QUBITS:
        raise UsageError(
            f"need 1 <= n-min <= n-max <= {MAX_QUBITS}, got {args.n_min}..{args.n_max}"
        )
    records = [
        make_record(n, 2**n - 1, 0, args.trials, args.seed)
        for n in range(args.n_min, args.n_max + 1)
    ]
    text = to_csv(records) if args.format == "csv" else to_json(records)
    try:
        with open(Path(args.out), "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return ""


def cmd_potent(args: argparse.Namespace) -> str:
    return json.dumps(DEMOS[args.demo](), indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvap",
        description="One-query search with a pre/post-selected ancilla, on dense statevectors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one search instance and print a record")
    run.add_argument("--n", type=int, required=True, help="qubits per register (1..14)")
    run.add_argument("--target", type=int, required=True, help="marked index y")
    run.add_argument("--w", type=int, default=0, help="reflection index, even popcount")
    run.add_argument("--trials", type=int, default=0, help="Monte Carlo trials")
    run.add_argument("--seed", type=_u64, default=42)
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="one record per n, y = N-1, w = 0")
    sweep.add_argument("--n-min", type=int, required=True)
    sweep.add_argument("--n-max", type=int, required=True)
    sweep.add_argument("--trials", type=int, default=0)
    sweep.add_argument("--seed", type=_u64, default=42)
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--out", required=True, help="output file")
    sweep.set_defaults(func=cmd_sweep)

    potent = sub.add_parser("potent", help="run a pre/post-selection demo")
    potent.add_argument("--demo", choices=sorted(DEMOS), required=True)
    potent.set_defaults(func=cmd_potent)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except (InvalidConfig, UsageError) as exc:
        print(f"wvap: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"wvap: internal error: {exc!r}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
