"""Command-line front end: experiments, slot runs, and circuit export.

Every experiment subcommand requires an explicit --seed so that repeated
invocations are bitwise reproducible. Numeric output is formatted to 12
significant digits. Output goes to stdout as JSON by default; --out takes
either a bare format name (json, jsonl, csv) for stdout or a file path
whose extension picks the format.

Exit status: 0 on success, 2 on usage errors, 1 on internal failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .circuits import LeaderAwareLayout, leader_aware_circuit, prepare_leader_aware
from .protocol import (
    SlotType,
    contend,
    decode_ancilla,
    read_ancillas,
    run_downlink_slot,
    run_uplink_slot,
)
from .session import (
    SessionConfig,
    anonymity_experiment,
    fairness_experiment,
    run_session,
)
from .statevector import RandomSource

FORMATS = ("json", "jsonl", "csv")


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _slot_pattern(text: str) -> tuple[SlotType, ...]:
    """Parse a slot pattern like 'du', 'dudu', or 'downlink,uplink'."""
    text = text.strip().lower()
    if not text:
        raise argparse.ArgumentTypeError("slot pattern must not be empty")
    if set(text) <= {"d", "u"}:
        return tuple(SlotType.DOWNLINK if c == "d" else SlotType.UPLINK for c in text)
    pattern = []
    for token in text.split(","):
        token = token.strip()
        if token in ("d", "down", "downlink"):
            pattern.append(SlotType.DOWNLINK)
        elif token in ("u", "up", "uplink"):
            pattern.append(SlotType.UPLINK)
        else:
            raise argparse.ArgumentTypeError(f"unknown slot type {token!r}")
    return tuple(pattern)


def _round_floats(obj):
    """Pin floats to 12 significant digits so output is format-stable."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _resolve_output(args) -> tuple[str, str | None]:
    """(format, path or None for stdout) from --out/--format."""
    out = args.out
    fmt = args.format
    if out is None:
        return fmt or "json", None
    if out in FORMATS:
        if fmt is not None and fmt != out:
            raise ValueError(f"--out {out} conflicts with --format {fmt}")
        return out, None
    if fmt is None:
        suffix = out.rsplit(".", 1)[-1].lower() if "." in out else ""
        fmt = suffix if suffix in FORMATS else "json"
    return fmt, out


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(_round_floats(obj), sort_keys=True) + "\n"


def _dump_jsonl(records) -> str:
    return "".join(json.dumps(_round_floats(r), sort_keys=True) + "\n" for r in records)


def _cmd_elect(args, fmt: str, path: str | None) -> None:
    rng = RandomSource(args.seed)
    layout = LeaderAwareLayout(args.n)
    winner, w_outcomes, state = contend(prepare_leader_aware(args.n), rng)
    ancilla, _ = read_ancillas(state, layout, rng)
    decoded = decode_ancilla(ancilla, args.n)
    if decoded != winner:
        raise RuntimeError(f"ancilla decode {decoded} disagrees with winner {winner}")
    _emit(
        _dump_json(
            {
                "n": args.n,
                "seed": args.seed,
                "winner": decoded,
                "w_outcomes": list(w_outcomes),
                "ancilla": list(ancilla),
            }
        ),
        path,
    )


def _cmd_slot(args, fmt: str, path: str | None, slot_type: SlotType) -> None:
    run = run_uplink_slot if slot_type is SlotType.UPLINK else run_downlink_slot
    report = run(args.n, None, RandomSource(args.seed))
    record = report.to_record(0)
    record["seed"] = args.seed
    _emit(_dump_jsonl([record]) if fmt == "jsonl" else _dump_json(record), path)


def _session_csv(stats) -> str:
    lines = ["slot_type,winner,count"]
    for st, hist in stats.winner_hist.items():
        for winner, count in hist.items():
            lines.append(f"{st},{winner},{count}")
    return "\n".join(lines) + "\n"


def _cmd_session(args, fmt: str, path: str | None) -> None:
    config = SessionConfig(
        n=args.n, seed=args.seed, slots=args.slots, trials=args.trials
    )
    stats, records = run_session(config, jobs=args.jobs)
    if fmt == "jsonl":
        _emit(_dump_jsonl(records), path)
    elif fmt == "csv":
        _emit(_session_csv(stats), path)
    else:
        doc = stats.to_dict()
        doc["seed"] = args.seed
        doc["slots"] = [st.value for st in config.slots]
        _emit(_dump_json(doc), path)


def _cmd_fairness(args, fmt: str, path: str | None) -> None:
    result = fairness_experiment(args.n, args.trials, args.seed, jobs=args.jobs)
    if fmt == "csv":
        lines = ["winner,count"]
        for winner in sorted(result.histogram):
            lines.append(f"{winner},{result.histogram[winner]}")
        _emit("\n".join(lines) + "\n", path)
    else:
        _emit(_dump_json(result.to_dict()), path)


def _cmd_anonymity(args, fmt: str, path: str | None) -> None:
    report = anonymity_experiment(args.n)
    if fmt == "csv":
        lines = ["slot_type,max_deviation,views,vacuous"]
        for st, sa in report.per_slot.items():
            lines.append(
                f"{st.value},{sa.max_deviation:.12g},{sa.view_count},{int(sa.vacuous)}"
            )
        _emit("\n".join(lines) + "\n", path)
    else:
        _emit(_dump_json(report.to_dict()), path)


def _cmd_export_circuit(args) -> None:
    _emit(leader_aware_circuit(args.n).to_text(), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entaccess",
        description="Entanglement access control experiments on a star quantum network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True, trials=False):
        p.add_argument("--n", type=_positive_int, required=True, help="number of end-nodes")
        if seed:
            p.add_argument("--seed", type=_nonnegative_int, required=True,
                           help="RNG seed (required: runs are reproducible, never wall-clock seeded)")
        if trials:
            p.add_argument("--trials", type=_positive_int, required=True, help="trial count")
        p.add_argument("--format", choices=FORMATS, help="output format")
        p.add_argument("--out", help="output: a format name for stdout, or a file path")

    p = sub.add_parser("elect", help="run one contention round and report the winner")
    add_common(p)
    p.set_defaults(func=_cmd_elect, formats=("json",))

    p = sub.add_parser("uplink", help="run one uplink slot")
    add_common(p)
    p.set_defaults(
        func=lambda a, f, o: _cmd_slot(a, f, o, SlotType.UPLINK),
        formats=("json", "jsonl"),
    )

    p = sub.add_parser("downlink", help="run one downlink slot")
    add_common(p)
    p.set_defaults(
        func=lambda a, f, o: _cmd_slot(a, f, o, SlotType.DOWNLINK),
        formats=("json", "jsonl"),
    )

    p = sub.add_parser("session", help="run a multi-slot session")
    add_common(p)
    p.add_argument("--trials", type=_positive_int, default=1, help="trial count")
    p.add_argument("--slots", type=_slot_pattern, default=(SlotType.DOWNLINK, SlotType.UPLINK),
                   help="slot pattern, e.g. 'du' or 'downlink,uplink' (default du)")
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="worker processes for trials (output independent of this)")
    p.set_defaults(func=_cmd_session, formats=FORMATS)

    p = sub.add_parser("fairness", help="winner-histogram uniformity experiment")
    add_common(p, trials=True)
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="worker processes for trials (output independent of this)")
    p.set_defaults(func=_cmd_fairness, formats=("json", "csv"))

    p = sub.add_parser("anonymity", help="exhaustive winner-anonymity check (n <= 4)")
    add_common(p, seed=False)
    p.set_defaults(func=_cmd_anonymity, formats=("json", "csv"))

    p = sub.add_parser("export-circuit", help="emit the contention circuit as a gate list")
    p.add_argument("--n", type=_positive_int, required=True, help="number of end-nodes")
    p.add_argument("--out", help="output file path (default stdout)")
    p.set_defaults(func=_cmd_export_circuit, formats=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.formats is None:
        invoke = lambda: args.func(args)
    else:
        try:
            fmt, path = _resolve_output(args)
        except ValueError as exc:
            parser.error(str(exc))
        if fmt not in args.formats:
            parser.error(f"{args.command} does not support {fmt} output")
        invoke = lambda: args.func(args, fmt, path)
    try:
        invoke()
    except Exception as exc:  # internal invariant violations and bad values
        print(f"entaccess: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
