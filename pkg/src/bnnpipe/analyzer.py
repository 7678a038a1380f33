"""Closed-form resource and throughput model.

Element counts and parallelism limits are computed analytically from the
lowering scheme, independently of the compiler's emitted programs; tests
cross-check the two against each other. Throughput figures derive from the
profile's fixed packet rate (one inference per packet), so they are
model-derived numbers, not measurements.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

from .errors import CapacityError
from .ir import ChipProfile, PipelineProgram
from .model import BnnModel

TABLE_WIDTHS = (16, 32, 64, 128, 256, 512, 1024, 2048)


def _check_width(n: int) -> None:
    if n < 8 or n > 2048 or n & (n - 1):
        raise ValueError(f"invalid activation width {n}: must be a power of two in [8, 2048]")


def max_parallel(n: int, profile: ChipProfile) -> int:
    """Neurons processable in one batch, limited purely by PHV capacity.

    The base lowering stores each neuron's xnor result twice, so a neuron
    occupies 2n bits; native popcount removes the duplication and doubles
    the count. The parallel-operation budget is deliberately not applied
    here; it surfaces as warnings instead.
    """
    _check_width(n)
    if profile.native_popcnt:
        return profile.phv_bits // n
    return (profile.phv_bits // 2) // n


def _add_tree_levels(n: int, word_width: int) -> int:
    words = ceil(n / word_width)
    return (words - 1).bit_length()


def elements_for_layer(n: int, p: int, b: int, profile: ChipProfile) -> int:
    """Pipeline elements one layer occupies for a given plan.

    Base profile, single batch: 3 + 2*log2(n), plus 1 when P > 1 for the
    replication element. Native popcount: (P>1) + 4 + ceil(log2(n/width)).
    Multi-batch layers repeat the per-batch portion B times and share one
    fold element.
    """
    _check_width(n)
    if p < 1 or b < 1:
        raise ValueError(f"invalid plan P={p} B={b}")
    replication = 1 if p > 1 else 0
    if profile.native_popcnt:
        per_batch = replication + 3 + _add_tree_levels(n, profile.popcnt_width)
    else:
        per_batch = replication + 2 + 2 * (n.bit_length() - 1)
    return b * per_batch + 1


def capacity_table(profile: ChipProfile) -> list[tuple[int, int, int]]:
    """(activations, max parallel neurons, elements) for each supported
    power-of-two activation width from 16 to 2048, at full parallelism."""
    if profile.native_popcnt:
        raise ValueError("capacity table is defined for base profiles")
    rows = []
    for n in TABLE_WIDTHS:
        p = max_parallel(n, profile)
        rows.append((n, p, elements_for_layer(n, p, 1, profile)))
    return rows


def throughput(model: BnnModel, profile: ChipProfile) -> tuple[int, int, int]:
    """(packets/s, inferences/s, neurons/s) at the profile's line rate.

    One packet carries one inference, so inferences/s equals the packet
    rate and neurons/s scales with the model's total neuron count.
    """
    from .compiler import plan_parallelism

    plans = plan_parallelism(model, profile)
    total = sum(plan.span_len for plan in plans)
    if total > profile.elements_max:
        raise CapacityError(
            f"program needs {total} elements, exceeds {profile.elements_max} "
            f"by {total - profile.elements_max}"
        )
    pps = profile.packets_per_second
    return pps, pps, pps * model.total_neurons


@dataclass
class LayerUsage:
    layer: int
    activations: int
    neurons: int
    parallel: int
    batches: int
    elements: int


@dataclass
class ResourceReport:
    model_name: str
    profile: ChipProfile
    layers: list[LayerUsage]
    elements_used: int
    phv_bits_used: int
    max_ops: int
    op_warnings: int
    feasible: bool
    deficit: int
    packets_per_second: int
    inferences_per_second: int
    neurons_per_second: int
    formula_mismatches: list[str]

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "profile": self.profile.name,
            "layers": [
                {
                    "layer": u.layer,
                    "activations": u.activations,
                    "neurons": u.neurons,
                    "parallel": u.parallel,
                    "batches": u.batches,
                    "elements": u.elements,
                }
                for u in self.layers
            ],
            "totals": {
                "elements": self.elements_used,
                "elements_max": self.profile.elements_max,
                "phv_bits_used": self.phv_bits_used,
                "phv_bits": self.profile.phv_bits,
                "max_ops": self.max_ops,
                "op_warnings": self.op_warnings,
            },
            "throughput": {
                "packets_per_second": self.packets_per_second,
                "inferences_per_second": self.inferences_per_second,
                "neurons_per_second": self.neurons_per_second,
            },
            "feasible": self.feasible,
            "deficit": self.deficit,
            "formula_mismatches": self.formula_mismatches,
        }

    def render_text(self) -> str:
        lines = [f"model {self.model_name}  profile {self.profile.name}"]
        lines.append("layer  activations  neurons  parallel  batches  elements")
        for u in self.layers:
            lines.append(
                f"{u.layer:>5}  {u.activations:>11}  {u.neurons:>7}  "
                f"{u.parallel:>8}  {u.batches:>7}  {u.elements:>8}"
            )
        lines.append(
            f"elements {self.elements_used}/{self.profile.elements_max}  "
            f"phv bits {self.phv_bits_used}/{self.profile.phv_bits}  "
            f"max ops/element {self.max_ops}  op warnings {self.op_warnings}"
        )
        lines.append(
            f"throughput: {self.packets_per_second} packets/s  "
            f"{self.inferences_per_second} inferences/s  "
            f"{self.neurons_per_second} neurons/s"
        )
        lines.append(f"feasible: {'yes' if self.feasible else 'no'}")
        if self.deficit:
            lines.append(f"exceeds {self.profile.elements_max} by {self.deficit}")
        for msg in self.formula_mismatches:
            lines.append(f"internal error: {msg}")
        return "\n".join(lines) + "\n"


def _layer_op_counts(n: int, neurons: int, p: int, b: int, profile: ChipProfile) -> list[int]:
    """Predicted per-element operation counts for one layer, in emission
    order (without the shared fold element)."""
    counts: list[int] = []
    if profile.native_popcnt:
        words = ceil(n / profile.popcnt_width)
        for batch in range(b):
            pb = min(p, neurons - batch * p)
            if p > 1:
                counts.append(pb)
            counts.append(pb * words)
            counts.append(pb * words)
            active = words
            while active > 1:
                counts.append(pb * (active // 2))
                active = (active + 1) // 2
            counts.append(pb)
    else:
        levels = n.bit_length() - 1
        for batch in range(b):
            pb = min(p, neurons - batch * p)
            if p > 1:
                counts.append(pb)
            counts.append(pb if p > 1 else 2)
            counts.extend([2 * pb, 2 * pb] * levels)
            counts.append(pb)
    return counts


def _used_bits(ranges: list[tuple[int, int]]) -> int:
    total = 0
    last = -1
    for start, end in sorted(ranges):
        if end <= last:
            continue
        total += end - max(start, last)
        last = end
    return total


def report(
    model: BnnModel, profile: ChipProfile, program: PipelineProgram | None = None
) -> ResourceReport:
    """Combine the planning, element-count, and throughput formulas into
    one report. When a compiled program is supplied, its element spans and
    per-element operation counts are cross-checked against the formulas;
    any disagreement is flagged as an internal error."""
    from .compiler import plan_parallelism

    plans = plan_parallelism(model, profile)
    layers = [
        LayerUsage(plan.index, plan.n, plan.neurons, plan.p, plan.b, plan.span_len)
        for plan in plans
    ]
    total = sum(plan.span_len for plan in plans)
    feasible = total <= profile.elements_max
    deficit = max(0, total - profile.elements_max)

    op_counts: list[int] = []
    for plan in plans:
        op_counts.extend(_layer_op_counts(plan.n, plan.neurons, plan.p, plan.b, profile))
        op_counts.append(1)  # fold
    max_ops = max(op_counts)
    op_warnings = sum(1 for c in op_counts if c > profile.ops_warn_threshold)

    ranges = [(plans[0].input_field.offset, plans[0].input_field.offset + plans[0].input_field.width)]
    for plan in plans:
        for f in plan.slots + ((plan.sign_field,) if plan.sign_field else ()) + (plan.out_field,):
            ranges.append((f.offset, f.offset + f.width))
    phv_bits_used = _used_bits(ranges)

    mismatches: list[str] = []
    if program is not None:
        if program.metadata is None:
            mismatches.append("program carries no layer metadata")
        else:
            for plan, span in zip(plans, program.metadata.layers):
                if (span.start, span.count, span.p, span.b) != (
                    plan.span_start,
                    plan.span_len,
                    plan.p,
                    plan.b,
                ):
                    mismatches.append(
                        f"layer {plan.index}: program span {span} != formula "
                        f"(start={plan.span_start}, count={plan.span_len}, "
                        f"p={plan.p}, b={plan.b})"
                    )
        if len(program.elements) != total:
            mismatches.append(
                f"program has {len(program.elements)} elements, formula says {total}"
            )
        actual_ops = [len(e.ops) for e in program.elements]
        if actual_ops != op_counts:
            mismatches.append("per-element operation counts diverge from formulas")

    pps = profile.packets_per_second
    return ResourceReport(
        model_name=model.name,
        profile=profile,
        layers=layers,
        elements_used=total,
        phv_bits_used=phv_bits_used,
        max_ops=max_ops,
        op_warnings=op_warnings,
        feasible=feasible,
        deficit=deficit,
        packets_per_second=pps,
        inferences_per_second=pps,
        neurons_per_second=pps * model.total_neurons,
        formula_mismatches=mismatches,
    )
