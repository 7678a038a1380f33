"""Compile binarized neural networks onto an abstract match-action
switching pipeline, simulate the result bit-exactly, and analyze resource
usage and throughput."""

from .analyzer import (
    ResourceReport,
    capacity_table,
    elements_for_layer,
    max_parallel,
    report,
    throughput,
)
from .bitvec import BitVector
from .compiler import (
    LayerPlan,
    compile,
    lower_layer_base,
    lower_layer_native,
    plan_parallelism,
    schedule_popcount_tree,
    swar_masks,
)
from .errors import BnnPipeError, CapacityError, IRParseError, ModelError
from .ir import (
    PROFILES,
    RMT32,
    RMT32_POPCNT,
    ChipProfile,
    ElementProgram,
    FieldRef,
    PipelineProgram,
    PrimitiveOp,
    Slice,
    ValidationReport,
    validate_program,
)
from .ir_text import parse_ir_text, render_ir_text
from .model import (
    BnnModel,
    LayerSpec,
    parse_model,
    random_model,
    reference_forward,
    reference_neuron,
    render_model,
)
from .p4gen import render_p4
from .simulator import Phv, Trace, eval_op, run_packet, run_packets, step_element

__version__ = "0.1.0"

__all__ = [
    "BitVector",
    "BnnModel",
    "BnnPipeError",
    "CapacityError",
    "ChipProfile",
    "ElementProgram",
    "FieldRef",
    "IRParseError",
    "LayerPlan",
    "LayerSpec",
    "ModelError",
    "PROFILES",
    "Phv",
    "PipelineProgram",
    "PrimitiveOp",
    "RMT32",
    "RMT32_POPCNT",
    "ResourceReport",
    "Slice",
    "Trace",
    "ValidationReport",
    "capacity_table",
    "compile",
    "elements_for_layer",
    "eval_op",
    "lower_layer_base",
    "lower_layer_native",
    "max_parallel",
    "parse_ir_text",
    "parse_model",
    "plan_parallelism",
    "random_model",
    "reference_forward",
    "reference_neuron",
    "render_ir_text",
    "render_model",
    "render_p4",
    "report",
    "run_packet",
    "run_packets",
    "schedule_popcount_tree",
    "step_element",
    "swar_masks",
    "throughput",
    "validate_program",
]
