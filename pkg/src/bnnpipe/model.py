"""Binarized neural network models and the reference forward pass.

A binarized neuron with N single-bit inputs computes

    y = 1  iff  popcount(xnor(x, w)) >= N / 2

where bit value 1 encodes +1 and bit value 0 encodes -1. XNOR counts
agreements between activations and weights, so the threshold form above is
exactly the sign of the +/-1 dot product, with a tie at N/2 resolving to 1.
Neuron j of a layer produces output bit j (bit 0 = neuron 0), and that
output vector feeds the next layer unchanged.

Everything in this module is immutable, pure, and deliberately simple: it
is the ground truth that compiled pipeline programs are checked against
bit for bit.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .bitvec import BitVector
from .errors import ModelError

WIDTH_MIN = 8
WIDTH_MAX = 2048


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def _check_width(value: int, what: str) -> None:
    if not (_is_pow2(value) and WIDTH_MIN <= value <= WIDTH_MAX):
        raise ModelError(
            f"{what} {value} not a power of two in [{WIDTH_MIN}, {WIDTH_MAX}]"
        )


@dataclass(frozen=True)
class LayerSpec:
    """Shape of one fully-connected layer: `inputs` bits in, `neurons` bits out."""

    inputs: int
    neurons: int

    def __post_init__(self):
        _check_width(self.inputs, "inputs")
        if self.neurons < 1:
            raise ModelError(f"neurons {self.neurons} < 1")


@dataclass(frozen=True)
class BnnModel:
    """A named stack of layers plus per-neuron weight bit vectors.

    weights[l][j] is the weight vector of neuron j in layer l; its width
    equals layers[l].inputs and its bit i multiplies activation bit i.
    """

    name: str
    layers: tuple[LayerSpec, ...]
    weights: tuple[tuple[BitVector, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "weights", tuple(tuple(ws) for ws in self.weights))
        if not self.layers:
            raise ModelError("model has no layers")
        for i in range(len(self.layers) - 1):
            cur, nxt = self.layers[i], self.layers[i + 1]
            if nxt.inputs != cur.neurons:
                raise ModelError(
                    f"layer {i + 1} inputs {nxt.inputs} != layer {i} neurons {cur.neurons}"
                )
            if not (_is_pow2(cur.neurons) and WIDTH_MIN <= cur.neurons <= WIDTH_MAX):
                raise ModelError(
                    f"layer {i} neurons {cur.neurons} not a power of two in "
                    f"[{WIDTH_MIN}, {WIDTH_MAX}] (must feed layer {i + 1})"
                )
        if len(self.weights) != len(self.layers):
            raise ModelError(
                f"{len(self.weights)} weight groups != {len(self.layers)} layers"
            )
        for i, (spec, ws) in enumerate(zip(self.layers, self.weights)):
            if len(ws) != spec.neurons:
                raise ModelError(
                    f"layer {i}: {len(ws)} weight vectors != {spec.neurons} neurons"
                )
            for j, w in enumerate(ws):
                if w.width != spec.inputs:
                    raise ModelError(
                        f"layer {i} neuron {j}: weight width {w.width} != inputs {spec.inputs}"
                    )

    @property
    def input_width(self) -> int:
        return self.layers[0].inputs

    @property
    def output_width(self) -> int:
        return self.layers[-1].neurons

    @property
    def total_neurons(self) -> int:
        return sum(spec.neurons for spec in self.layers)


def reference_neuron(x: BitVector, w: BitVector) -> int:
    """Single-neuron ground truth: 1 iff popcount(xnor(x, w)) >= width / 2.

    The width must be even so the tie threshold is an integer; a count of
    exactly width/2 (a zero +/-1 dot product) yields 1.
    """
    if x.width != w.width:
        raise ValueError(f"width mismatch: x {x.width} != w {w.width}")
    if x.width % 2:
        raise ValueError(f"width {x.width} is odd")
    return 1 if x.xnor(w).popcount() >= x.width // 2 else 0


def reference_forward(model: BnnModel, x: BitVector) -> BitVector:
    """Run the full forward pass, layer by layer, neuron by neuron."""
    if x.width != model.input_width:
        raise ValueError(
            f"input width {x.width} != model input width {model.input_width}"
        )
    for spec, ws in zip(model.layers, model.weights):
        out = 0
        for j, w in enumerate(ws):
            out |= reference_neuron(x, w) << j
        x = BitVector(spec.neurons, out)
    return x


def random_model(
    seed: int, shape: list[tuple[int, int]] | tuple[tuple[int, int], ...]
) -> BnnModel:
    """Build a model with uniformly random weights, deterministic per seed."""
    rng = random.Random(seed)
    layers = tuple(LayerSpec(i, n) for i, n in shape)
    weights = tuple(
        tuple(BitVector.random(rng, spec.inputs) for _ in range(spec.neurons))
        for spec in layers
    )
    return BnnModel(f"random-{seed}", layers, weights)


def parse_model(text: str) -> BnnModel:
    """Parse the JSON model format.

    {"name": str,
     "layers": [{"inputs": int, "neurons": int, "weights": [hex, ...]}, ...]}

    Each weight hex string has inputs/4 digits, MSB first.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error: {exc}") from None
    if not isinstance(raw, dict):
        raise ModelError("model file must be a JSON object")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise ModelError('missing or empty "name"')
    layers_raw = raw.get("layers")
    if not isinstance(layers_raw, list) or not layers_raw:
        raise ModelError('"layers" must be a non-empty list')

    layers: list[LayerSpec] = []
    weights: list[tuple[BitVector, ...]] = []
    for i, entry in enumerate(layers_raw):
        if not isinstance(entry, dict):
            raise ModelError(f"layer {i}: not an object")
        inputs, neurons = entry.get("inputs"), entry.get("neurons")
        if not isinstance(inputs, int) or not isinstance(neurons, int):
            raise ModelError(f'layer {i}: "inputs" and "neurons" must be integers')
        ws_raw = entry.get("weights")
        if not isinstance(ws_raw, list):
            raise ModelError(f'layer {i}: "weights" must be a list')
        layers.append(LayerSpec(inputs, neurons))
        ws = []
        for j, hx in enumerate(ws_raw):
            if not isinstance(hx, str):
                raise ModelError(f"layer {i} neuron {j}: weight is not a hex string")
            try:
                ws.append(BitVector.from_hex(hx, inputs))
            except ValueError as exc:
                raise ModelError(f"layer {i} neuron {j}: {exc}") from None
        weights.append(tuple(ws))
    return BnnModel(name, tuple(layers), tuple(weights))


def render_model(model: BnnModel) -> str:
    """Inverse of parse_model."""
    doc = {
        "name": model.name,
        "layers": [
            {
                "inputs": spec.inputs,
                "neurons": spec.neurons,
                "weights": [w.to_hex() for w in ws],
            }
            for spec, ws in zip(model.layers, model.weights)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
