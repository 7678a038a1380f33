"""Abstract match-action pipeline programs.

A program is a chip profile, a table of named PHV bit fields, and an
ordered list of elements. Each element applies its operations with VLIW
semantics: every operand is read from the state the element received and
every destination is written afterwards, so a destination may overlay a
source consumed in the same element, but two operations of one element
must never write overlapping bits.

All types are immutable after construction; validation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .bitvec import bitmask

OPCODES = ("copy", "repl", "xnorc", "andc", "shrandc", "add", "gec", "fold", "popcnt")


@dataclass(frozen=True)
class ChipProfile:
    """Resource envelope of a target pipeline.

    popcnt_width is only meaningful when native_popcnt is set; it bounds the
    operand width of the popcnt primitive.
    """

    name: str
    elements_max: int = 32
    phv_bits: int = 4096
    ops_warn_threshold: int = 224
    packets_per_second: int = 960_000_000
    native_popcnt: bool = False
    popcnt_width: int = 32

    def __post_init__(self):
        for attr in (
            "elements_max",
            "phv_bits",
            "ops_warn_threshold",
            "packets_per_second",
            "popcnt_width",
        ):
            if getattr(self, attr) < 1:
                raise ValueError(f"{attr} must be positive")
        if self.popcnt_width > 64:
            raise ValueError(f"popcnt_width {self.popcnt_width} > 64")


RMT32 = ChipProfile("rmt32")
RMT32_POPCNT = ChipProfile("rmt32-popcnt", native_popcnt=True)

PROFILES = {p.name: p for p in (RMT32, RMT32_POPCNT)}


@dataclass(frozen=True)
class FieldRef:
    """A named contiguous bit range of the PHV."""

    name: str
    offset: int
    width: int

    def whole(self) -> Slice:
        return Slice(self, 0, self.width)

    def part(self, off: int, width: int) -> Slice:
        return Slice(self, off, width)


@dataclass(frozen=True)
class Slice:
    """A sub-range of a field, used as operand or destination."""

    field: FieldRef
    off: int
    width: int

    @property
    def abs_off(self) -> int:
        return self.field.offset + self.off

    @property
    def is_whole(self) -> bool:
        return self.off == 0 and self.width == self.field.width


@dataclass(frozen=True)
class PrimitiveOp:
    """One action-processor operation.

    opcode        dst <-
      copy        src                      (equal widths)
      repl        src repeated dst/src times
      xnorc       ~(src ^ imm)             (equal widths)
      andc        src & imm                (equal widths)
      shrandc     (src >> shift) & imm     (logical shift, equal widths)
      add         srcs[0] + srcs[1]        (unsigned, modulo 2^width)
      gec         1 if srcs[0] >= imm else 0   (dst is 1 bit)
      fold        bit k of dst <- srcs[k]  (each source 1 bit wide)
      popcnt      population count of src  (native profiles only)
    """

    opcode: str
    dst: Slice
    srcs: tuple[Slice, ...] = ()
    imm: int | None = None
    shift: int | None = None


def copy(dst: Slice, src: Slice) -> PrimitiveOp:
    return PrimitiveOp("copy", dst, (src,))


def repl(dst: Slice, src: Slice) -> PrimitiveOp:
    return PrimitiveOp("repl", dst, (src,))


def xnorc(dst: Slice, src: Slice, imm: int) -> PrimitiveOp:
    return PrimitiveOp("xnorc", dst, (src,), imm=imm)


def andc(dst: Slice, src: Slice, imm: int) -> PrimitiveOp:
    return PrimitiveOp("andc", dst, (src,), imm=imm)


def shrandc(dst: Slice, src: Slice, shift: int, imm: int) -> PrimitiveOp:
    return PrimitiveOp("shrandc", dst, (src,), imm=imm, shift=shift)


def add(dst: Slice, a: Slice, b: Slice) -> PrimitiveOp:
    return PrimitiveOp("add", dst, (a, b))


def gec(dst: Slice, src: Slice, imm: int) -> PrimitiveOp:
    return PrimitiveOp("gec", dst, (src,), imm=imm)


def fold(dst: Slice, srcs: Sequence[Slice]) -> PrimitiveOp:
    return PrimitiveOp("fold", dst, tuple(srcs))


def popcnt(dst: Slice, src: Slice) -> PrimitiveOp:
    return PrimitiveOp("popcnt", dst, (src,))


@dataclass(frozen=True)
class ElementProgram:
    """The operations one pipeline element applies in parallel."""

    ops: tuple[PrimitiveOp, ...]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))


@dataclass(frozen=True)
class LayerSpan:
    """Where one model layer landed in the element sequence."""

    layer: int
    n: int
    p: int
    b: int
    start: int
    count: int


@dataclass(frozen=True)
class ProgramMetadata:
    """Compiler provenance. Not serialized in the IR text format."""

    model_name: str
    layers: tuple[LayerSpan, ...]


@dataclass(frozen=True)
class PipelineProgram:
    profile: ChipProfile
    fields: tuple[FieldRef, ...]
    input_field: FieldRef
    output_field: FieldRef
    elements: tuple[ElementProgram, ...]
    metadata: ProgramMetadata | None = dc_field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass
class ValidationReport:
    errors: list[str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def _check_slice(sl: Slice, where: str, declared: set[FieldRef], errors: list[str]) -> bool:
    ok = True
    if sl.field not in declared:
        errors.append(f"{where}: undeclared field {sl.field.name}")
        ok = False
    if sl.width < 1:
        errors.append(f"{where}: slice width {sl.width} < 1")
        ok = False
    if sl.off < 0 or sl.off + sl.width > sl.field.width:
        errors.append(
            f"{where}: slice [{sl.off}:{sl.width}] outside field "
            f"{sl.field.name} of width {sl.field.width}"
        )
        ok = False
    return ok


def _check_imm_fits(op: PrimitiveOp, width: int, where: str, errors: list[str]) -> None:
    if op.imm is None or not 0 <= op.imm <= bitmask(width):
        errors.append(f"{where}: immediate does not fit {width} bits")


def _check_op(op: PrimitiveOp, prof: ChipProfile, where: str, errors: list[str]) -> None:
    oc = op.opcode
    if oc not in OPCODES:
        errors.append(f"{where}: unknown opcode {oc}")
        return
    nsrc = len(op.srcs)
    if oc == "fold":
        if nsrc < 1:
            errors.append(f"{where}: fold needs at least one source")
            return
        if op.dst.width != nsrc:
            errors.append(f"{where}: fold dst width {op.dst.width} != {nsrc} sources")
        for k, s in enumerate(op.srcs):
            if s.width != 1:
                errors.append(f"{where}: fold source {k} width {s.width} != 1")
        return
    if nsrc != (2 if oc == "add" else 1):
        errors.append(f"{where}: {oc} takes {2 if oc == 'add' else 1} source(s), got {nsrc}")
        return
    src = op.srcs[0]
    if oc in ("copy", "xnorc", "andc", "shrandc"):
        if src.width != op.dst.width:
            errors.append(f"{where}: src width {src.width} != dst width {op.dst.width}")
        if oc != "copy":
            _check_imm_fits(op, op.dst.width, where, errors)
        if oc == "shrandc":
            if op.shift is None or not 0 <= op.shift < src.width:
                errors.append(f"{where}: shift {op.shift} out of range for width {src.width}")
    elif oc == "repl":
        if src.width < 1 or op.dst.width % src.width:
            errors.append(
                f"{where}: repl dst width {op.dst.width} not a multiple of src width {src.width}"
            )
    elif oc == "add":
        a, b = op.srcs
        if not (a.width == b.width == op.dst.width):
            errors.append(
                f"{where}: add widths differ ({a.width}, {b.width} -> {op.dst.width})"
            )
    elif oc == "gec":
        if op.dst.width != 1:
            errors.append(f"{where}: gec dst width {op.dst.width} != 1")
        if op.imm is None or op.imm < 0:
            errors.append(f"{where}: gec needs a non-negative immediate")
    elif oc == "popcnt":
        if not prof.native_popcnt:
            errors.append(f"{where}: popcnt not available in profile {prof.name}")
        elif src.width > prof.popcnt_width:
            errors.append(
                f"{where}: popcnt src width {src.width} > popcnt width {prof.popcnt_width}"
            )
        need = src.width.bit_length()
        if op.dst.width < need:
            errors.append(
                f"{where}: popcnt dst width {op.dst.width} cannot hold counts up to {src.width}"
            )


def validate_program(prog: PipelineProgram) -> ValidationReport:
    """Check a program against its profile.

    Errors: too many elements, fields outside the PHV, undeclared or
    malformed operands, two writes touching the same bits within one
    element, popcnt on a profile without it. Warnings: elements whose
    operation count exceeds the profile's parallel-operation budget.
    An empty error list means the simulator will accept the program.
    """
    prof = prog.profile
    errors: list[str] = []
    warnings: list[str] = []

    if len(prog.elements) > prof.elements_max:
        errors.append(f"elements {len(prog.elements)} > {prof.elements_max}")

    declared = set(prog.fields)
    for f in prog.fields:
        if f.width < 1 or f.offset < 0 or f.offset + f.width > prof.phv_bits:
            errors.append(
                f"field {f.name}: bits [{f.offset}:{f.offset + f.width}) "
                f"outside phv of {prof.phv_bits} bits"
            )
    for role, f in (("input", prog.input_field), ("output", prog.output_field)):
        if f not in declared:
            errors.append(f"{role} field {f.name} not declared")

    for i, elem in enumerate(prog.elements):
        writes: list[tuple[int, int, int]] = []
        for k, op in enumerate(elem.ops):
            where = f"element {i} op {k}"
            dst_ok = _check_slice(op.dst, where, declared, errors)
            for s in op.srcs:
                _check_slice(s, where, declared, errors)
            _check_op(op, prof, where, errors)
            if dst_ok:
                writes.append((op.dst.abs_off, op.dst.abs_off + op.dst.width, k))
        writes.sort()
        for (a0, a1, ka), (b0, b1, kb) in zip(writes, writes[1:]):
            if b0 < a1:
                errors.append(
                    f"element {i}: double write on bits [{b0}:{min(a1, b1)}) "
                    f"by ops {ka} and {kb}"
                )
        if len(elem.ops) > prof.ops_warn_threshold:
            warnings.append(f"element {i}: ops {len(elem.ops)} > {prof.ops_warn_threshold}")

    return ValidationReport(errors, warnings)
