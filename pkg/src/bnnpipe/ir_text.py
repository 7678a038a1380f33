"""Canonical text form of pipeline programs.

One construct per line:

    profile <name> elements=<int> phv=<int> pps=<int> [popcnt=<int>]
    field <id> <offset> <width>
    input <field-id>
    output <field-id>
    element <index>
      <op lines, two-space indented>

Hex immediates are MSB-first and zero padded to the operand width; a bare
field id stands for the whole field, `id[off:width]` for a slice. Blank
lines and lines starting with '#' are ignored on parse. Program metadata
(model name, layer spans) is not part of the format.
"""

from __future__ import annotations

import re

from .bitvec import bitmask, hex_digits
from .errors import IRParseError
from .ir import (
    OPCODES,
    ChipProfile,
    ElementProgram,
    FieldRef,
    PipelineProgram,
    PrimitiveOp,
    Slice,
)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*$")
_SLICE_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_.-]*)(?:\[(\d+):(\d+)\])?$")


def _render_slice(sl: Slice) -> str:
    if sl.is_whole:
        return sl.field.name
    return f"{sl.field.name}[{sl.off}:{sl.width}]"


def _render_imm(imm: int, width: int) -> str:
    return f"0x{imm:0{hex_digits(width)}X}"


def _render_op(op: PrimitiveOp) -> str:
    dst = _render_slice(op.dst)
    srcs = [_render_slice(s) for s in op.srcs]
    oc = op.opcode
    if oc in ("copy", "repl", "popcnt"):
        return f"{oc} {dst} <- {srcs[0]}"
    if oc in ("xnorc", "andc"):
        return f"{oc} {dst} <- {srcs[0]}, {_render_imm(op.imm, op.dst.width)}"
    if oc == "shrandc":
        return f"shrandc {dst} <- {srcs[0]} >> {op.shift}, {_render_imm(op.imm, op.dst.width)}"
    if oc == "add":
        return f"add {dst} <- {srcs[0]}, {srcs[1]}"
    if oc == "gec":
        return f"gec {dst} <- {srcs[0]}, {op.imm}"
    if oc == "fold":
        return f"fold {dst} <- " + ", ".join(srcs)
    raise ValueError(f"unknown opcode {oc}")


def render_ir_text(prog: PipelineProgram) -> str:
    """Deterministic canonical rendering; inverse of parse_ir_text."""
    p = prog.profile
    head = f"profile {p.name} elements={p.elements_max} phv={p.phv_bits} pps={p.packets_per_second}"
    if p.native_popcnt:
        head += f" popcnt={p.popcnt_width}"
    lines = [head]
    for f in prog.fields:
        lines.append(f"field {f.name} {f.offset} {f.width}")
    lines.append(f"input {prog.input_field.name}")
    lines.append(f"output {prog.output_field.name}")
    for i, elem in enumerate(prog.elements):
        lines.append(f"element {i}")
        for op in elem.ops:
            lines.append("  " + _render_op(op))
    return "\n".join(lines) + "\n"


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.profile: ChipProfile | None = None
        self.fields: dict[str, FieldRef] = {}
        self.field_order: list[FieldRef] = []
        self.input_field: FieldRef | None = None
        self.output_field: FieldRef | None = None
        self.elements: list[list[PrimitiveOp]] = []
        self.in_elements = False

    def fail(self, msg: str, line: int):
        raise IRParseError(msg, line)

    def parse(self) -> PipelineProgram:
        for num, raw in enumerate(self.lines, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            head = text.split(None, 1)[0]
            if head == "profile":
                self._parse_profile(text, num)
            elif head == "field":
                self._parse_field(text, num)
            elif head in ("input", "output"):
                self._parse_io(head, text, num)
            elif head == "element":
                self._parse_element(text, num)
            elif self.in_elements:
                self._parse_op(text, num)
            else:
                self.fail(f"syntax error: unexpected line {text!r}", num)
        if self.profile is None:
            raise IRParseError("missing profile line")
        if self.input_field is None or self.output_field is None:
            raise IRParseError("missing input or output declaration")
        return PipelineProgram(
            profile=self.profile,
            fields=tuple(self.field_order),
            input_field=self.input_field,
            output_field=self.output_field,
            elements=tuple(ElementProgram(tuple(ops)) for ops in self.elements),
        )

    def _parse_profile(self, text: str, num: int):
        if self.profile is not None:
            self.fail("duplicate profile line", num)
        parts = text.split()
        if len(parts) < 5:
            self.fail("syntax error in profile line", num)
        name = parts[1]
        if not _NAME_RE.match(name):
            self.fail(f"bad profile name {name!r}", num)
        kv: dict[str, int] = {}
        for part in parts[2:]:
            if "=" not in part:
                self.fail(f"syntax error in profile line near {part!r}", num)
            key, _, val = part.partition("=")
            if key not in ("elements", "phv", "pps", "popcnt") or key in kv:
                self.fail(f"bad profile key {key!r}", num)
            try:
                kv[key] = int(val)
            except ValueError:
                self.fail(f"bad integer {val!r} in profile line", num)
        for key in ("elements", "phv", "pps"):
            if key not in kv:
                self.fail(f"profile line missing {key}=", num)
        try:
            self.profile = ChipProfile(
                name=name,
                elements_max=kv["elements"],
                phv_bits=kv["phv"],
                packets_per_second=kv["pps"],
                native_popcnt="popcnt" in kv,
                popcnt_width=kv.get("popcnt", 32),
            )
        except ValueError as exc:
            self.fail(str(exc), num)

    def _parse_field(self, text: str, num: int):
        if self.in_elements:
            self.fail("field declared after elements", num)
        parts = text.split()
        if len(parts) != 4:
            self.fail("syntax error in field line", num)
        name = parts[1]
        if not _NAME_RE.match(name):
            self.fail(f"bad field name {name!r}", num)
        if name in self.fields:
            self.fail(f"duplicate field {name}", num)
        try:
            ref = FieldRef(name, int(parts[2]), int(parts[3]))
        except ValueError:
            self.fail("bad integer in field line", num)
        self.fields[name] = ref
        self.field_order.append(ref)

    def _parse_io(self, role: str, text: str, num: int):
        parts = text.split()
        if len(parts) != 2:
            self.fail(f"syntax error in {role} line", num)
        ref = self.fields.get(parts[1])
        if ref is None:
            self.fail(f"unknown field {parts[1]}", num)
        if role == "input":
            self.input_field = ref
        else:
            self.output_field = ref

    def _parse_element(self, text: str, num: int):
        parts = text.split()
        if len(parts) != 2:
            self.fail("syntax error in element line", num)
        try:
            idx = int(parts[1])
        except ValueError:
            self.fail(f"bad element index {parts[1]!r}", num)
        if idx != len(self.elements):
            self.fail(f"element index {idx} out of order (expected {len(self.elements)})", num)
        self.elements.append([])
        self.in_elements = True

    def _slice(self, token: str, num: int) -> Slice:
        m = _SLICE_RE.match(token)
        if not m:
            self.fail(f"bad operand {token!r}", num)
        name, off, width = m.groups()
        ref = self.fields.get(name)
        if ref is None:
            self.fail(f"unknown field {name}", num)
        if off is None:
            return ref.whole()
        sl = ref.part(int(off), int(width))
        if sl.width < 1 or sl.off + sl.width > ref.width:
            self.fail(f"slice [{off}:{width}] outside field {name} of width {ref.width}", num)
        return sl

    def _imm(self, token: str, width: int, num: int) -> int:
        if not token.startswith("0x"):
            self.fail(f"bad immediate {token!r}", num)
        digits = token[2:]
        if len(digits) != hex_digits(width):
            self.fail(
                f"immediate {token} has {len(digits)} digits, "
                f"expected {hex_digits(width)} for width {width}",
                num,
            )
        try:
            value = int(digits, 16)
        except ValueError:
            self.fail(f"bad immediate {token!r}", num)
        if value > bitmask(width):
            self.fail(f"immediate {token} does not fit width {width}", num)
        return value

    def _parse_op(self, text: str, num: int):
        head, _, rest = text.partition(" ")
        if head not in OPCODES:
            self.fail(f"unknown opcode {head}", num)
        if " <- " not in rest:
            self.fail(f"syntax error in {head} line", num)
        dst_tok, _, args = rest.partition(" <- ")
        dst = self._slice(dst_tok.strip(), num)
        parts = [a.strip() for a in args.split(",")] if args.strip() else []
        op: PrimitiveOp | None = None
        if head in ("copy", "repl", "popcnt"):
            if len(parts) != 1:
                self.fail(f"{head} takes one source", num)
            op = PrimitiveOp(head, dst, (self._slice(parts[0], num),))
        elif head in ("xnorc", "andc"):
            if len(parts) != 2:
                self.fail(f"{head} takes a source and an immediate", num)
            src = self._slice(parts[0], num)
            op = PrimitiveOp(head, dst, (src,), imm=self._imm(parts[1], dst.width, num))
        elif head == "shrandc":
            if len(parts) != 2 or " >> " not in parts[0]:
                self.fail("shrandc takes 'src >> shift' and an immediate", num)
            src_tok, _, shift_tok = parts[0].partition(" >> ")
            src = self._slice(src_tok.strip(), num)
            try:
                shift = int(shift_tok)
            except ValueError:
                self.fail(f"bad shift {shift_tok!r}", num)
            op = PrimitiveOp(
                "shrandc", dst, (src,), imm=self._imm(parts[1], dst.width, num), shift=shift
            )
        elif head == "add":
            if len(parts) != 2:
                self.fail("add takes two sources", num)
            op = PrimitiveOp(
                "add", dst, (self._slice(parts[0], num), self._slice(parts[1], num))
            )
        elif head == "gec":
            if len(parts) != 2:
                self.fail("gec takes a source and an immediate", num)
            src = self._slice(parts[0], num)
            try:
                imm = int(parts[1])
            except ValueError:
                self.fail(f"bad immediate {parts[1]!r}", num)
            op = PrimitiveOp("gec", dst, (src,), imm=imm)
        elif head == "fold":
            if not parts:
                self.fail("fold takes at least one source", num)
            op = PrimitiveOp("fold", dst, tuple(self._slice(p, num) for p in parts))
        self.elements[-1].append(op)


def parse_ir_text(text: str) -> PipelineProgram:
    """Parse the canonical IR text form. Raises IRParseError with the line
    number on malformed input; profile-level legality (element budget,
    popcnt availability) is left to validate_program."""
    return _Parser(text).parse()
