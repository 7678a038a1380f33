"""Lowering of BNN models to pipeline programs.

A layer with N-bit activations and P neurons processed in parallel becomes
the following element sequence on the base profile:

  1. Replication (skipped when P == 1): P repeat-copies place the input
     twice into each neuron's 2N-bit pair field, so the later per-level
     mask and shift-mask can run on independent copies.
  2. XNOR: one operation per neuron xnors the pair field in place against
     the neuron's weights concatenated with themselves. With P == 1 the
     input field is read directly by two operations instead.
  3. Popcount tree: log2(N) levels of two elements each. The first element
     of a level masks copy A and shift-masks copy B; the second sums them,
     writing the result into both copies for the next level. After the
     last level copy A holds popcount(xnor) as an N-bit value.
  4. Sign: one unsigned compare per neuron against N/2 produces the output
     bit (ties yield 1).
  5. Fold: a single operation gathers the sign bits into the layer output
     vector, which is the next layer's input.

That is 3 + 2*log2(N) elements per layer, plus one for replication when
P > 1. Profiles with a native popcount primitive instead xnor into
popcnt-width words, count each word, and sum the word counts in a small
add tree, for (P>1) + 4 + ceil(log2(N/width)) elements.

Layers with more neurons than fit in one batch are split into B batches
sharing one final fold. Batches reuse the same work fields, so the layer
input and the sign bits of earlier batches must survive in dedicated
space; P is lowered below the single-batch maximum to reserve it.

PHV layout: work fields grow from bit 0, each layer's input sits at the
top of the PHV (where the previous layer's fold wrote it), and fields may
overlap as long as no element writes the same bit twice. Element semantics
read pre-state, which makes the full-capacity layouts legal.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

from .analyzer import elements_for_layer, max_parallel
from .bitvec import BitVector, bitmask
from .errors import CapacityError
from .ir import (
    ChipProfile,
    ElementProgram,
    FieldRef,
    LayerSpan,
    PipelineProgram,
    ProgramMetadata,
    Slice,
    add,
    andc,
    copy,
    fold,
    gec,
    popcnt,
    repl,
    shrandc,
    validate_program,
    xnorc,
)
from .model import BnnModel


@dataclass(frozen=True)
class LayerPlan:
    """Parallelism, batching, and field assignment for one layer."""

    index: int
    n: int
    neurons: int
    p: int
    b: int
    span_start: int
    span_len: int
    input_field: FieldRef
    slots: tuple[FieldRef, ...]
    sign_field: FieldRef | None  # dedicated sign strip, only when b > 1
    out_field: FieldRef


def swar_masks(n: int) -> list[int]:
    """Per-level group masks for an n-bit parallel bit count.

    Level l keeps the low 2^l bits of every 2^(l+1)-bit group, so for
    n = 8 the masks are 0x55, 0x33, 0x0F.
    """
    masks = []
    for level in range(n.bit_length() - 1):
        step = 2 << level
        block = bitmask(1 << level)
        m = 0
        for off in range(0, n, step):
            m |= block << off
        masks.append(m)
    return masks


def plan_parallelism(model: BnnModel, profile: ChipProfile) -> list[LayerPlan]:
    """Choose P and B per layer and assign PHV fields.

    P is the neuron count when the layer fits in one batch, otherwise as
    many neurons as fit next to the persistent input and sign strips.
    """
    phv = profile.phv_bits
    plans: list[LayerPlan] = []
    start = 0
    prev_out: FieldRef | None = None
    for idx, spec in enumerate(model.layers):
        n, neurons = spec.inputs, spec.neurons
        slot_w = n if profile.native_popcnt else 2 * n
        cap = max_parallel(n, profile)
        if neurons <= cap:
            p, b = neurons, 1
        else:
            room = phv - n - neurons  # input strip + per-neuron sign strip
            p = room // slot_w
            if p < 1:
                raise CapacityError(
                    f"layer {idx} unschedulable: {n} input bits and {neurons} "
                    f"sign bits leave no room for work fields in a {phv}-bit phv"
                )
            b = ceil(neurons / p)
        if neurons > phv:
            raise CapacityError(
                f"layer {idx} unschedulable: {neurons} output bits exceed the phv"
            )
        input_field = prev_out if prev_out is not None else FieldRef("x", phv - n, n)
        slots = tuple(
            FieldRef(f"l{idx}s{j}", j * slot_w, slot_w) for j in range(p)
        )
        sign_field = (
            FieldRef(f"l{idx}sig", phv - n - neurons, neurons) if b > 1 else None
        )
        out_field = FieldRef(f"l{idx}y", phv - neurons, neurons)
        span_len = elements_for_layer(n, p, b, profile)
        plans.append(
            LayerPlan(
                index=idx,
                n=n,
                neurons=neurons,
                p=p,
                b=b,
                span_start=start,
                span_len=span_len,
                input_field=input_field,
                slots=slots,
                sign_field=sign_field,
                out_field=out_field,
            )
        )
        start += span_len
        prev_out = out_field
    return plans


def schedule_popcount_tree(n: int, slots: list[FieldRef] | tuple[FieldRef, ...]) -> list[ElementProgram]:
    """Tree-pattern bit count over 2n-bit pair fields holding two copies
    of the value to count.

    Emits 2*log2(n) elements. Per level, the first element applies the
    group mask to copy A and shift-then-mask to copy B of every slot; the
    second element writes the sum into both copies. The final count lands
    in bits [0, n) of each slot.
    """
    if n & (n - 1) or n < 2:
        raise ValueError(f"activation width {n} is not a power of two >= 2")
    for slot in slots:
        if slot.width < 2 * n:
            raise ValueError(f"slot {slot.name} narrower than {2 * n} bits")
    elements = []
    for level, mask in enumerate(swar_masks(n)):
        shift_amount = 1 << level
        mask_ops = []
        sum_ops = []
        for slot in slots:
            a = slot.part(0, n)
            bcopy = slot.part(n, n)
            mask_ops.append(andc(a, a, mask))
            mask_ops.append(shrandc(bcopy, bcopy, shift_amount, mask))
            sum_ops.append(add(a, a, bcopy))
            sum_ops.append(add(bcopy, a, bcopy))
        elements.append(ElementProgram(tuple(mask_ops)))
        elements.append(ElementProgram(tuple(sum_ops)))
    return elements


def _sign_slice(plan: LayerPlan, neuron: int) -> Slice:
    """Where neuron's output bit lives between the sign and fold elements."""
    if plan.sign_field is not None:
        return plan.sign_field.part(neuron, 1)
    return plan.slots[neuron].part(0, 1)


def lower_layer_base(plan: LayerPlan, weights: tuple[BitVector, ...]) -> list[ElementProgram]:
    """Emit the replication / xnor / popcount tree / sign / fold sequence."""
    n, p = plan.n, plan.p
    half = n // 2
    elements: list[ElementProgram] = []
    for batch in range(plan.b):
        base = batch * p
        pb = min(p, plan.neurons - base)
        slots = plan.slots[:pb]
        if p > 1:
            elements.append(
                ElementProgram(
                    tuple(repl(s.whole(), plan.input_field.whole()) for s in slots)
                )
            )
            xnor_ops = [
                xnorc(
                    slots[j].whole(),
                    slots[j].whole(),
                    weights[base + j].value | weights[base + j].value << n,
                )
                for j in range(pb)
            ]
        else:
            w = weights[base].value
            src = plan.input_field.whole()
            xnor_ops = [
                xnorc(slots[0].part(0, n), src, w),
                xnorc(slots[0].part(n, n), src, w),
            ]
        elements.append(ElementProgram(tuple(xnor_ops)))
        elements.extend(schedule_popcount_tree(n, slots))
        elements.append(
            ElementProgram(
                tuple(
                    gec(_sign_slice(plan, base + j), slots[j].part(0, n), half)
                    for j in range(pb)
                )
            )
        )
    elements.append(
        ElementProgram(
            (
                fold(
                    plan.out_field.whole(),
                    [_sign_slice(plan, m) for m in range(plan.neurons)],
                ),
            )
        )
    )
    return elements


def _word_spans(n: int, width: int) -> list[tuple[int, int]]:
    return [(off, min(width, n - off)) for off in range(0, n, width)]


def lower_layer_native(
    plan: LayerPlan, weights: tuple[BitVector, ...], profile: ChipProfile
) -> list[ElementProgram]:
    """Lowering for profiles with a native popcount primitive.

    No duplication: each neuron gets a single N-bit work field, xnored in
    popcnt-width words. One popcnt per word writes its count into the low
    bits of the word's slot, and an add tree merges the word counts.
    """
    n, p = plan.n, plan.p
    words = _word_spans(n, profile.popcnt_width)
    cw = n.bit_length()  # enough bits for counts up to n
    if any(cw > w for _, w in words):
        raise CapacityError(
            f"popcnt width {profile.popcnt_width} too small: layer {plan.index} "
            f"needs {cw}-bit counts inside each word slot"
        )
    elements: list[ElementProgram] = []
    for batch in range(plan.b):
        base = batch * p
        pb = min(p, plan.neurons - base)
        slots = plan.slots[:pb]
        if p > 1:
            elements.append(
                ElementProgram(
                    tuple(copy(s.whole(), plan.input_field.whole()) for s in slots)
                )
            )
        xnor_ops = []
        cnt_ops = []
        for j in range(pb):
            wv = weights[base + j].value
            for off, w in words:
                src = slots[j].part(off, w) if p > 1 else plan.input_field.part(off, w)
                xnor_ops.append(
                    xnorc(slots[j].part(off, w), src, (wv >> off) & bitmask(w))
                )
                cnt_ops.append(popcnt(slots[j].part(off, cw), slots[j].part(off, w)))
        elements.append(ElementProgram(tuple(xnor_ops)))
        elements.append(ElementProgram(tuple(cnt_ops)))
        active = [off for off, _ in words]
        while len(active) > 1:
            ops = []
            merged = []
            for i in range(0, len(active) - 1, 2):
                lo, hi = active[i], active[i + 1]
                for j in range(pb):
                    ops.append(
                        add(
                            slots[j].part(lo, cw),
                            slots[j].part(lo, cw),
                            slots[j].part(hi, cw),
                        )
                    )
                merged.append(lo)
            if len(active) % 2:
                merged.append(active[-1])
            active = merged
            elements.append(ElementProgram(tuple(ops)))
        elements.append(
            ElementProgram(
                tuple(
                    gec(_sign_slice(plan, base + j), slots[j].part(0, cw), n // 2)
                    for j in range(pb)
                )
            )
        )
    elements.append(
        ElementProgram(
            (
                fold(
                    plan.out_field.whole(),
                    [_sign_slice(plan, m) for m in range(plan.neurons)],
                ),
            )
        )
    )
    return elements


def compile(model: BnnModel, profile: ChipProfile) -> PipelineProgram:
    """Lower a model onto a profile.

    Raises CapacityError with a per-layer breakdown when the program would
    need more elements than the profile provides. The result always passes
    validate_program with zero errors.
    """
    plans = plan_parallelism(model, profile)
    total = sum(plan.span_len for plan in plans)
    if total > profile.elements_max:
        lines = [
            f"program needs {total} elements, exceeds {profile.elements_max} "
            f"by {total - profile.elements_max}"
        ]
        for plan in plans:
            lines.append(
                f"  layer {plan.index}: N={plan.n} P={plan.p} B={plan.b} "
                f"-> {plan.span_len} elements"
            )
        raise CapacityError("\n".join(lines))

    elements: list[ElementProgram] = []
    fields: list[FieldRef] = [plans[0].input_field]
    for plan, weights in zip(plans, model.weights):
        if profile.native_popcnt:
            elements.extend(lower_layer_native(plan, weights, profile))
        else:
            elements.extend(lower_layer_base(plan, weights))
        fields.extend(plan.slots)
        if plan.sign_field is not None:
            fields.append(plan.sign_field)
        fields.append(plan.out_field)

    program = PipelineProgram(
        profile=profile,
        fields=tuple(fields),
        input_field=plans[0].input_field,
        output_field=plans[-1].out_field,
        elements=tuple(elements),
        metadata=ProgramMetadata(
            model_name=model.name,
            layers=tuple(
                LayerSpan(plan.index, plan.n, plan.p, plan.b, plan.span_start, plan.span_len)
                for plan in plans
            ),
        ),
    )
    report = validate_program(program)
    if report.errors:
        raise RuntimeError(
            "internal error: compiled program failed validation: " + report.errors[0]
        )
    return program
