"""P4-flavored rendering of pipeline programs.

Best-effort syntax: one control block per element, one action per
operation, applied in element order. The semantic content mirrors the IR
one to one; the output is meant for reading and diffing, not for a vendor
toolchain.
"""

from __future__ import annotations

from .bitvec import hex_digits
from .ir import PipelineProgram, PrimitiveOp, Slice


def _expr(sl: Slice) -> str:
    if sl.is_whole:
        return f"phv.{sl.field.name}"
    hi = sl.off + sl.width - 1
    return f"phv.{sl.field.name}[{hi}:{sl.off}]"


def _imm(value: int, width: int) -> str:
    return f"{width}w0x{value:0{hex_digits(width)}X}"


def _op_body(op: PrimitiveOp) -> list[str]:
    dst = _expr(op.dst)
    oc = op.opcode
    if oc == "copy":
        return [f"{dst} = {_expr(op.srcs[0])};"]
    if oc == "repl":
        times = op.dst.width // op.srcs[0].width
        return [f"{dst} = " + " ++ ".join([_expr(op.srcs[0])] * times) + ";"]
    if oc == "xnorc":
        return [f"{dst} = ~({_expr(op.srcs[0])} ^ {_imm(op.imm, op.dst.width)});"]
    if oc == "andc":
        return [f"{dst} = {_expr(op.srcs[0])} & {_imm(op.imm, op.dst.width)};"]
    if oc == "shrandc":
        return [
            f"{dst} = ({_expr(op.srcs[0])} >> {op.shift}) & {_imm(op.imm, op.dst.width)};"
        ]
    if oc == "add":
        return [f"{dst} = {_expr(op.srcs[0])} + {_expr(op.srcs[1])};"]
    if oc == "gec":
        return [
            f"{dst} = ({_expr(op.srcs[0])} >= {op.srcs[0].width}w{op.imm}) ? 1w1 : 1w0;"
        ]
    if oc == "fold":
        base = op.dst
        lines = []
        for k, s in enumerate(op.srcs):
            bit = Slice(base.field, base.off + k, 1)
            lines.append(f"{_expr(bit)} = {_expr(s)};")
        return lines
    if oc == "popcnt":
        return [f"{dst} = popcount({_expr(op.srcs[0])});"]
    raise ValueError(f"unknown opcode {oc}")


def render_p4(prog: PipelineProgram) -> str:
    """Render a validated program as P4-flavored text."""
    lines = [f"// pipeline program for profile {prog.profile.name}"]
    if prog.profile.native_popcnt:
        lines.append("extern bit<32> popcount<T>(in T data);")
    lines.append("")
    lines.append("header phv_t {")
    for f in prog.fields:
        lines.append(f"    bit<{f.width}> {f.name};  // phv bits [{f.offset}:{f.offset + f.width})")
    lines.append("}")
    lines.append("")
    for i, elem in enumerate(prog.elements):
        lines.append(f"control element_{i}(inout phv_t phv) {{")
        for k, op in enumerate(elem.ops):
            lines.append(f"    action e{i}_op{k}() {{")
            for stmt in _op_body(op):
                lines.append(f"        {stmt}")
            lines.append("    }")
        lines.append("    apply {")
        for k in range(len(elem.ops)):
            lines.append(f"        e{i}_op{k}();")
        lines.append("    }")
        lines.append("}")
        lines.append("")
    lines.append("control pipeline(inout phv_t phv) {")
    lines.append("    apply {")
    for i in range(len(prog.elements)):
        lines.append(f"        element_{i}.apply(phv);")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"
