"""Bit-exact execution of pipeline programs.

Each element runs with VLIW semantics: all operands are read from the
state the element received, then all destination ranges are written at
once. Bits outside the written ranges carry over unchanged. Execution is
pure; distinct packets can be simulated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable

from .bitvec import BitVector, bitmask
from .ir import ElementProgram, PipelineProgram, PrimitiveOp, Slice, validate_program


@dataclass(frozen=True)
class Phv:
    """Packet header vector state between elements."""

    width: int
    bits: int = 0

    def __post_init__(self):
        if not 0 <= self.bits <= bitmask(self.width):
            raise ValueError("phv state does not fit its width")

    def read(self, offset: int, width: int) -> int:
        return (self.bits >> offset) & bitmask(width)


@dataclass
class ElementTrace:
    index: int
    writes: list[tuple[Slice, int]]


@dataclass
class Trace:
    elements: list[ElementTrace] = dc_field(default_factory=list)
    output: BitVector | None = None


def _eval(bits: int, op: PrimitiveOp) -> int:
    oc = op.opcode
    dst = op.dst
    if oc == "fold":
        value = 0
        for k, s in enumerate(op.srcs):
            value |= ((bits >> s.abs_off) & 1) << k
        return value
    src = op.srcs[0]
    a = (bits >> src.abs_off) & bitmask(src.width)
    if oc == "andc":
        return a & op.imm
    if oc == "shrandc":
        return (a >> op.shift) & op.imm
    if oc == "add":
        b = op.srcs[1]
        return (a + ((bits >> b.abs_off) & bitmask(b.width))) & bitmask(dst.width)
    if oc == "xnorc":
        return ~(a ^ op.imm) & bitmask(dst.width)
    if oc == "gec":
        return 1 if a >= op.imm else 0
    if oc == "copy":
        return a
    if oc == "repl":
        value = 0
        for i in range(dst.width // src.width):
            value |= a << (i * src.width)
        return value
    if oc == "popcnt":
        return a.bit_count()
    raise ValueError(f"unknown opcode {oc}")


def eval_op(phv: Phv, op: PrimitiveOp) -> tuple[Slice, int]:
    """Evaluate one operation against a PHV state; returns the destination
    slice and the value that an element would write there."""
    return op.dst, _eval(phv.bits, op)


def _step_bits(bits: int, elem: ElementProgram) -> tuple[int, list[tuple[Slice, int]]]:
    writes = [(op.dst, _eval(bits, op)) for op in elem.ops]
    for dst, value in writes:
        off = dst.abs_off
        bits = (bits & ~(bitmask(dst.width) << off)) | (value << off)
    return bits, writes


def step_element(phv: Phv, elem: ElementProgram) -> Phv:
    """Apply one element: read everything from phv, then write everything."""
    bits, _ = _step_bits(phv.bits, elem)
    return Phv(phv.width, bits)


def _run(prog: PipelineProgram, x: BitVector, want_trace: bool):
    if x.width != prog.input_field.width:
        raise ValueError(
            f"input width {x.width} != program input width {prog.input_field.width}"
        )
    bits = x.value << prog.input_field.offset
    trace = Trace() if want_trace else None
    for i, elem in enumerate(prog.elements):
        bits, writes = _step_bits(bits, elem)
        if trace is not None:
            trace.elements.append(ElementTrace(i, writes))
    out = prog.output_field
    result = BitVector(out.width, (bits >> out.offset) & bitmask(out.width))
    if trace is not None:
        trace.output = result
        return result, trace
    return result


def run_packet(prog: PipelineProgram, x: BitVector, trace: bool = False):
    """Run one packet through a validated program.

    The PHV starts as all zeros with the input written to the program's
    input field; the returned vector is the output field's final content.
    With trace=True, returns (output, Trace) with every write recorded.
    """
    report = validate_program(prog)
    if report.errors:
        raise ValueError(f"invalid program: {report.errors[0]}")
    return _run(prog, x, trace)


def run_packets(prog: PipelineProgram, xs: Iterable[BitVector]) -> list[BitVector]:
    """Run many packets, validating the program once."""
    report = validate_program(prog)
    if report.errors:
        raise ValueError(f"invalid program: {report.errors[0]}")
    return [_run(prog, x, False) for x in xs]
