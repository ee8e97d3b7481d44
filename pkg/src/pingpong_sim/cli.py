"""Command-line front end: simulate runs, print oracle reports, sweep parameters.

Exit codes: 0 success, 1 configuration error (message on stderr, nothing
on stdout), 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from fractions import Fraction
from typing import IO

from . import params, render
from .adversary import ProtocolIntegrityError, STRATEGY_NAMES
from .harness import RunConfig, RunStats, iter_rounds, run_simulation
from .oracle import attack_report
from .protocol import InvariantViolation


class CliConfigError(Exception):
    """Invalid flags or flag values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # keep exit-code policy out of argparse's hands
        raise CliConfigError(message)


def _add_protocol_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", default="original", help="original | modified")
    parser.add_argument(
        "--attack", default="none", help="adversary: " + " | ".join(STRATEGY_NAMES)
    )
    parser.add_argument(
        "--control-prob", default="1/2", help="control-mode probability (rational or decimal)"
    )
    parser.add_argument(
        "--c0",
        default="1/2",
        help="within control mode, probability of measure-and-announce (modified variant)",
    )
    parser.add_argument("--receipt", default="on", help="receipt acknowledgment: on | off")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rounds", type=int, default=10000, help="number of rounds")
    parser.add_argument("--seed", type=int, default=0, help="unsigned 64-bit run seed")
    parser.add_argument(
        "--bits", default="random", help="message bits: random | pattern:<01-string>"
    )
    parser.add_argument(
        "--stop-on-detection",
        action="store_true",
        help="halt at the first detected or stalled round",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pingpong-sim", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run = sub.add_parser("run", help="Monte Carlo simulation", add_help=True)
    _add_protocol_flags(run)
    _add_run_flags(run)
    run.add_argument("--json", default="-", metavar="PATH|-", help="JSON output (- = stdout)")
    run.add_argument("--csv", default=None, metavar="PATH", help="per-round transcript CSV")

    oracle = sub.add_parser("oracle", help="exact single-round analysis", add_help=True)
    _add_protocol_flags(oracle)
    oracle.add_argument("--json", default="-", metavar="PATH|-", help="JSON output (- = stdout)")

    sweep = sub.add_parser("sweep", help="oracle (and optional runs) over a parameter grid")
    _add_protocol_flags(sweep)
    sweep.add_argument("--param", required=True, help="swept parameter: c0 | control-prob")
    sweep.add_argument("--from", dest="sweep_from", required=True, help="grid start")
    sweep.add_argument("--to", dest="sweep_to", required=True, help="grid end")
    sweep.add_argument("--steps", type=int, required=True, help="number of grid points")
    sweep.add_argument(
        "--rounds", type=int, default=None, help="also simulate each grid point (optional)"
    )
    sweep.add_argument("--seed", type=int, default=0, help="seed for the optional runs")
    sweep.add_argument("--csv", default=None, metavar="PATH", help="grid CSV (default stdout)")

    return parser


def _open_output(path: str, allow_stdout: bool) -> tuple[IO[str], bool]:
    if path == "-":
        if not allow_stdout:
            raise CliConfigError("this output only goes to a file, not '-'")
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise CliConfigError(f"cannot write {path!r}: {exc}") from exc


def _cmd_run(args: argparse.Namespace) -> int:
    config = params.build_run_config(
        variant=args.variant,
        attack=args.attack,
        rounds=args.rounds,
        control_prob=args.control_prob,
        c0=args.c0,
        receipt=args.receipt,
        seed=args.seed,
        bits=args.bits,
        stop_on_detection=args.stop_on_detection,
    )
    report = attack_report(config.protocol, config.strategy)
    if args.csv is not None:
        stream, close = _open_output(args.csv, allow_stdout=False)
        try:
            stats = _run_with_transcript(config, stream)
        finally:
            if close:
                stream.close()
    else:
        stats = run_simulation(config)
    payload = render.run_payload(config, stats, report)
    _emit_json(payload, args.json)
    return 0


def _run_with_transcript(config: RunConfig, stream: IO[str]) -> RunStats:
    stats = RunStats()

    def tee():
        for record in iter_rounds(config):
            stats.observe(record)
            yield record

    render.write_transcript(stream, tee())
    return stats


def _cmd_oracle(args: argparse.Namespace) -> int:
    protocol = params.build_protocol_config(
        args.variant, args.control_prob, args.c0, args.receipt
    )
    attack = params.parse_attack(args.attack)
    payload = render.oracle_payload(attack_report(protocol, attack))
    _emit_json(payload, args.json)
    return 0


def _sweep_values(start: Fraction, end: Fraction, steps: int) -> list[Fraction]:
    if steps < 1:
        raise CliConfigError(f"--steps must be >= 1, got {steps}")
    if steps == 1:
        return [start]
    step = (end - start) / (steps - 1)
    return [start + k * step for k in range(steps)]


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.param not in ("c0", "control-prob"):
        raise CliConfigError(f"--param must be 'c0' or 'control-prob', got {args.param!r}")
    base = params.build_protocol_config(args.variant, args.control_prob, args.c0, args.receipt)
    attack = params.parse_attack(args.attack)
    start = params.parse_probability(args.sweep_from, "--from")
    end = params.parse_probability(args.sweep_to, "--to")
    if args.rounds is not None and args.rounds < 1:
        raise CliConfigError(f"--rounds must be >= 1, got {args.rounds}")
    seed = params.parse_seed(args.seed)

    rows = []
    for value in _sweep_values(start, end, args.steps):
        if args.param == "c0":
            protocol = replace(base, sendback_split=value)
        else:
            protocol = replace(base, control_prob=value)
        report = attack_report(protocol, attack)
        stats = None
        if args.rounds is not None:
            stats = run_simulation(
                RunConfig(protocol=protocol, strategy=attack, rounds=args.rounds, seed=seed)
            )
        rows.append(render.sweep_row(args.param, value, report, stats))

    stream, close = _open_output(args.csv if args.csv is not None else "-", allow_stdout=True)
    try:
        render.write_sweep(stream, rows)
    finally:
        if close:
            stream.close()
    return 0


def _emit_json(payload: dict, destination: str) -> None:
    text = render.render_json(payload)
    if destination == "-":
        sys.stdout.write(text)
        return
    stream, close = _open_output(destination, allow_stdout=True)
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "run":
            return _cmd_run(args)
        if args.subcommand == "oracle":
            return _cmd_oracle(args)
        return _cmd_sweep(args)
    except (CliConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, ProtocolIntegrityError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
