"""Command-line interface.

Commands: compile, simulate, verify, report. Exit codes: 0 success,
2 usage error, 3 malformed input (model, IR, or packets), 4 model does
not fit the pipeline, 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from pathlib import Path

from . import analyzer, compiler
from .bitvec import BitVector
from .errors import CapacityError, IRParseError, ModelError
from .ir import PROFILES, ChipProfile, validate_program
from .ir_text import parse_ir_text, render_ir_text
from .model import parse_model, random_model, reference_forward
from .p4gen import render_p4
from .simulator import run_packet, run_packets

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CAPACITY = 4
EXIT_MISMATCH = 5


class _InputError(Exception):
    pass


def _load_profile(args: argparse.Namespace) -> ChipProfile:
    name = args.profile
    if name in PROFILES:
        profile = PROFILES[name]
    elif Path(name).is_file():
        try:
            raw = json.loads(Path(name).read_text())
            profile = ChipProfile(**raw)
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise _InputError(f"bad profile file {name}: {exc}") from None
    else:
        raise _InputError(
            f"unknown profile {name!r} (expected {', '.join(PROFILES)} or a JSON file)"
        )
    overrides = {}
    if args.elements is not None:
        overrides["elements_max"] = args.elements
    if args.phv_bits is not None:
        overrides["phv_bits"] = args.phv_bits
    if args.pps is not None:
        overrides["packets_per_second"] = args.pps
    if overrides:
        profile = dataclasses.replace(profile, **overrides)
    return profile


def _load_model(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _InputError(f"cannot read model file: {exc}") from None
    return parse_model(text)


def _read_packets(path: str, width: int) -> list[BitVector]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise _InputError(f"cannot read packets file: {exc}") from None
    packets = []
    for num, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            packets.append(BitVector.from_hex(text, width))
        except ValueError as exc:
            raise _InputError(f"packets line {num}: {exc}") from None
    return packets


def _parse_shape(text: str) -> list[tuple[int, int]]:
    try:
        dims = [int(part) for part in text.split(",")]
    except ValueError:
        raise _InputError(f"bad shape {text!r}, expected e.g. 32,64,32") from None
    if len(dims) < 2:
        raise _InputError("shape needs at least an input width and one layer")
    return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]


def cmd_compile(args: argparse.Namespace) -> int:
    profile = _load_profile(args)
    model = _load_model(args.model)
    program = compiler.compile(model, profile)
    Path(args.out).write_text(render_ir_text(program))
    if args.emit_p4:
        Path(args.emit_p4).write_text(render_p4(program))
    rep = analyzer.report(model, profile, program)
    print(rep.render_text(), end="")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.program).read_text()
    except OSError as exc:
        raise _InputError(f"cannot read program file: {exc}") from None
    program = parse_ir_text(text)
    check = validate_program(program)
    if check.errors:
        raise _InputError("invalid program: " + "; ".join(check.errors))
    packets = _read_packets(args.packets, program.input_field.width)
    trace_lines: list[str] = []
    outputs = []
    if args.trace:
        for idx, packet in enumerate(packets):
            out, trace = run_packet(program, packet, trace=True)
            outputs.append(out)
            trace_lines.append(f"packet {idx} input {packet.to_hex()}")
            for elem in trace.elements:
                trace_lines.append(f"  element {elem.index}")
                for dst, value in elem.writes:
                    name = dst.field.name
                    loc = name if dst.is_whole else f"{name}[{dst.off}:{dst.width}]"
                    trace_lines.append(f"    {loc} = 0x{value:X}")
            trace_lines.append(f"  output {out.to_hex()}")
        Path(args.trace).write_text("\n".join(trace_lines) + "\n")
    else:
        outputs = run_packets(program, packets)
    text_out = "\n".join(out.to_hex() for out in outputs)
    if outputs:
        text_out += "\n"
    if args.out:
        Path(args.out).write_text(text_out)
    else:
        print(text_out, end="")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    profile = _load_profile(args)
    if args.model:
        model = _load_model(args.model)
    elif args.random_shape:
        model = random_model(args.seed, _parse_shape(args.random_shape))
    else:
        raise _InputError("verify needs --model or --random-shape")
    program = compiler.compile(model, profile)
    rng = random.Random(args.seed)
    packets = [BitVector.random(rng, model.input_width) for _ in range(args.packets)]
    outputs = run_packets(program, packets)
    print(f"model {model.name}  profile {profile.name}  seed {args.seed}")
    for idx, (packet, got) in enumerate(zip(packets, outputs)):
        expected = reference_forward(model, packet)
        if got != expected:
            print(f"{idx}/{args.packets} match")
            print(
                f"mismatch at packet {idx}: input {packet.to_hex()} "
                f"expected {expected.to_hex()} actual {got.to_hex()}"
            )
            return EXIT_MISMATCH
    print(f"{args.packets}/{args.packets} match")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.table1:
        rows = analyzer.capacity_table(PROFILES["rmt32"])
        print("activations  parallel  elements")
        for n, p, e in rows:
            print(f"{n:>11}  {p:>8}  {e:>8}")
        if args.json:
            doc = {
                "table": [
                    {"activations": n, "parallel": p, "elements": e} for n, p, e in rows
                ]
            }
            Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    if not args.model:
        raise _InputError("report needs --model or --table1")
    profile = _load_profile(args)
    model = _load_model(args.model)
    try:
        program = compiler.compile(model, profile)
    except CapacityError:
        program = None
    rep = analyzer.report(model, profile, program)
    print(rep.render_text(), end="")
    if args.json:
        Path(args.json).write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _add_profile_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--profile",
        default="rmt32",
        help="chip profile: rmt32, rmt32-popcnt, or a JSON profile file",
    )
    sub.add_argument("--elements", type=int, help="override the element budget")
    sub.add_argument("--phv-bits", type=int, help="override the phv size in bits")
    sub.add_argument("--pps", type=int, help="override the packet rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnnpipe",
        description="Compile binarized neural networks onto a match-action "
        "pipeline, simulate programs, and analyze resources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="lower a model to pipeline IR")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--out", required=True, help="IR output path")
    p.add_argument("--emit-p4", help="also write a P4-flavored rendering")
    _add_profile_args(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="run packets through a compiled program")
    p.add_argument("--program", required=True, help="IR file")
    p.add_argument("--packets", required=True, help="file with one hex packet per line")
    p.add_argument("--out", help="write outputs here instead of stdout")
    p.add_argument("--trace", help="write a per-element write trace here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compile and check against the reference forward pass")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--random-shape", help="use a random model, e.g. 32,64,32")
    p.add_argument("--packets", type=int, default=1000, help="random packets to check")
    p.add_argument("--seed", type=int, default=0, help="seed for packets (and random model)")
    _add_profile_args(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="resource and throughput report")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--table1", action="store_true", help="print the capacity table")
    p.add_argument("--json", help="also write the report as JSON")
    _add_profile_args(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, IRParseError, _InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def entry() -> None:
    sys.exit(main())
