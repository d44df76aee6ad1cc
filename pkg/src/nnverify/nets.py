"""Feedforward network model, .nnet parsing and the float reference pass.

The float forward pass here is the oracle every fixed-point result is
compared against.  Weight matrices are stored fan-in x fan-out, so the
potential of neuron k in a layer is sum_j w[j][k] * input[j] + b[k].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class NnetParseError(ValueError):
    """Malformed .nnet input; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ActivationKind(enum.Enum):
    RELU = "relu"
    SIGMOID_LUT = "sigmoid"
    IDENTITY = "identity"


def relu(x: float) -> float:
    return x if x > 0 else 0.0


def sigmoid_exact(u: float) -> float:
    """Logistic function 1 / (1 + e**-u), stable for large |u|."""
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


class SigmoidTable:
    """Lookup table for the logistic function over [-20, 20].

    Cell i covers inputs [ (i - half)/inv_step, (i + 1 - half)/inv_step )
    and stores the exact sigmoid at the cell's lower grid point, so an
    input landing exactly on a grid point (0 in particular) reads the
    true sigmoid value there.  Below the domain the output is 0, above
    it 1; the tail error ~2e-9 is negligible against the cell width.
    """

    DOMAIN = 20

    def __init__(self, step: float = 0.01):
        inv_step = round(1.0 / step)
        if inv_step < 1 or abs(1.0 / inv_step - step) > 1e-12:
            raise ValueError(f"step must be a reciprocal integer, got {step}")
        self.inv_step = inv_step
        self.half = self.DOMAIN * inv_step
        self.lo = -float(self.DOMAIN)
        self.hi = float(self.DOMAIN)
        n = 2 * self.half
        grid = (np.arange(n) - self.half) / inv_step
        self.entries = 1.0 / (1.0 + np.exp(-grid))

    @property
    def step(self) -> float:
        return 1.0 / self.inv_step

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, u: float) -> int:
        return math.floor(u * self.inv_step) + self.half

    def index_of_raw(self, raw: int, frac_bits: int) -> int:
        # exact integer floor of (raw / 2**F) * inv_step + half
        return ((raw * self.inv_step) >> frac_bits) + self.half

    def lookup(self, u: float) -> float:
        index = self.index_of(u)
        if index < 0:
            return 0.0
        if index >= len(self.entries):
            return 1.0
        return float(self.entries[index])

    def lookup_index(self, index: int) -> float:
        if index < 0:
            return 0.0
        if index >= len(self.entries):
            return 1.0
        return float(self.entries[index])


def sigmoid_lut(u: float, table: SigmoidTable) -> float:
    """Table-based sigmoid: floor indexing, clamped to {0, 1} outside."""
    return table.lookup(u)


@dataclass
class Layer:
    """One dense layer: weights (fan_in x fan_out), biases, activation."""

    weights: np.ndarray
    biases: np.ndarray
    activation: ActivationKind = ActivationKind.RELU

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError("weights must be a 2-D matrix")
        if self.biases.shape != (self.weights.shape[1],):
            raise ValueError(
                f"bias length {self.biases.shape} does not match "
                f"fan-out {self.weights.shape[1]}"
            )
        if not (np.isfinite(self.weights).all() and np.isfinite(self.biases).all()):
            raise ValueError("layer parameters must be finite")

    @property
    def fan_in(self) -> int:
        return self.weights.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[1]


@dataclass
class ActivationTrace:
    """Per-layer activation potentials and outputs for one input vector."""

    input: np.ndarray
    potentials: list
    outputs: list

    @property
    def final_outputs(self) -> np.ndarray:
        return self.outputs[-1]


class Network:
    """An MLP plus the .nnet normalization metadata."""

    def __init__(
        self,
        layers: list,
        name: str = "",
        input_mins: Optional[list] = None,
        input_maxes: Optional[list] = None,
        means: Optional[list] = None,
        ranges: Optional[list] = None,
        sigmoid_table: Optional[SigmoidTable] = None,
    ):
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.fan_out != nxt.fan_in:
                raise ValueError(
                    f"layer widths disagree: {prev.fan_out} -> {nxt.fan_in}"
                )
        self.layers = layers
        self.name = name
        self.input_mins = input_mins
        self.input_maxes = input_maxes
        self.means = means
        self.ranges = ranges
        self.sigmoid_table = sigmoid_table
        if sigmoid_table is None and any(
            l.activation is ActivationKind.SIGMOID_LUT for l in layers
        ):
            self.sigmoid_table = SigmoidTable()

    @property
    def input_size(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_size(self) -> int:
        return self.layers[-1].fan_out

    @property
    def layer_sizes(self) -> list:
        return [self.input_size] + [l.fan_out for l in self.layers]

    @property
    def total_neurons(self) -> int:
        """Neuron count across all layers; inputs are not neurons."""
        return sum(l.fan_out for l in self.layers)

    def with_activations(
        self, hidden: ActivationKind, output: ActivationKind
    ) -> "Network":
        layers = [
            Layer(l.weights, l.biases, hidden if i < len(self.layers) - 1 else output)
            for i, l in enumerate(self.layers)
        ]
        return Network(
            layers,
            name=self.name,
            input_mins=self.input_mins,
            input_maxes=self.input_maxes,
            means=self.means,
            ranges=self.ranges,
            sigmoid_table=self.sigmoid_table,
        )

    def normalize(self, x) -> np.ndarray:
        """Clip to the stored input bounds, subtract mean, divide by range."""
        x = np.asarray(x, dtype=np.float64)
        if self.input_mins is None or self.means is None or self.ranges is None:
            raise ValueError("network carries no normalization metadata")
        lo = np.asarray(self.input_mins[: self.input_size])
        hi = np.asarray(self.input_maxes[: self.input_size])
        mean = np.asarray(self.means[: self.input_size])
        rng = np.asarray(self.ranges[: self.input_size])
        return (np.clip(x, lo, hi) - mean) / rng

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        if len(self.layers) != len(other.layers):
            return False
        for a, b in zip(self.layers, other.layers):
            if a.activation is not b.activation:
                return False
            if not (
                np.array_equal(a.weights, b.weights)
                and np.array_equal(a.biases, b.biases)
            ):
                return False
        return (
            self.input_mins == other.input_mins
            and self.input_maxes == other.input_maxes
            and self.means == other.means
            and self.ranges == other.ranges
        )


def _apply_activation(
    kind: ActivationKind, u: np.ndarray, table: Optional[SigmoidTable]
) -> np.ndarray:
    if kind is ActivationKind.IDENTITY:
        return u.copy()
    if kind is ActivationKind.RELU:
        return np.maximum(u, 0.0)
    if kind is ActivationKind.SIGMOID_LUT:
        if table is None:
            raise ValueError("sigmoid layer without a lookup table")
        return np.array([table.lookup(v) for v in u])
    raise ValueError(f"unsupported activation {kind}")


def activation_potential(layer: Layer, inputs) -> np.ndarray:
    """Weighted sums plus biases, in double precision."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (layer.fan_in,):
        raise ValueError(f"expected {layer.fan_in} inputs, got {x.shape}")
    return x @ layer.weights + layer.biases


def forward_float(net: Network, inputs) -> ActivationTrace:
    """Full float64 forward pass recording every potential and output."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (net.input_size,):
        raise ValueError(f"expected {net.input_size} inputs, got {x.shape}")
    potentials, outputs = [], []
    cur = x
    for layer in net.layers:
        u = activation_potential(layer, cur)
        y = _apply_activation(layer.activation, u, net.sigmoid_table)
        potentials.append(u)
        outputs.append(y)
        cur = y
    return ActivationTrace(input=x, potentials=potentials, outputs=outputs)


def classify(trace: ActivationTrace, threshold: float) -> Optional[int]:
    """Index of the unique output >= threshold.

    Several candidates resolve to the argmax, exact ties to the lowest
    index; no candidate at all is None rather than a forced guess.
    """
    outputs = np.asarray(trace.final_outputs)
    candidates = np.flatnonzero(outputs >= threshold)
    if candidates.size == 0:
        return None
    return int(candidates[np.argmax(outputs[candidates])])


# ---------------------------------------------------------------------------
# .nnet text format
# ---------------------------------------------------------------------------


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_data_line(self) -> tuple:
        while self.pos < len(self.lines):
            self.pos += 1
            raw = self.lines[self.pos - 1]
            stripped = raw.strip()
            if not stripped or stripped.startswith("//"):
                continue
            return stripped, self.pos
        raise NnetParseError("unexpected end of file", len(self.lines) or 1)


def _parse_numbers(line: str, lineno: int, dtype=float) -> list:
    out = []
    for tok in line.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(dtype(tok))
        except ValueError:
            raise NnetParseError(f"non-numeric token {tok!r}", lineno) from None
    return out


def parse_nnet(
    text,
    hidden_activation: ActivationKind = ActivationKind.RELU,
    output_activation: ActivationKind = ActivationKind.IDENTITY,
    sigmoid_table: Optional[SigmoidTable] = None,
    name: str = "",
) -> Network:
    """Parse .nnet text into a Network.

    Layout: optional // comments, then numLayers/inputSize/outputSize/
    maxLayerSize, the layer-sizes line, five legacy lines (flag, input
    mins, maxes, means, ranges; kept as metadata), then per layer N_l
    weight rows of fan-in values followed by N_l bias lines.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    reader = _LineReader(text)

    line, lineno = reader.next_data_line()
    header = _parse_numbers(line, lineno, int)
    if len(header) < 4:
        raise NnetParseError("header needs numLayers, inputSize, outputSize, maxLayerSize", lineno)
    num_layers, input_size, output_size, max_layer = header[:4]

    line, lineno = reader.next_data_line()
    sizes = _parse_numbers(line, lineno, int)
    if len(sizes) != num_layers + 1:
        raise NnetParseError(
            f"expected {num_layers + 1} layer sizes, got {len(sizes)}", lineno
        )
    if sizes[0] != input_size or sizes[-1] != output_size:
        raise NnetParseError("layer sizes disagree with the header", lineno)
    if max(sizes) > max_layer:
        raise NnetParseError(
            f"layer size {max(sizes)} exceeds declared maximum {max_layer}", lineno
        )

    legacy = []
    for _ in range(5):
        line, lineno = reader.next_data_line()
        legacy.append(_parse_numbers(line, lineno))
    _flag, mins, maxes, means, ranges = legacy

    layers = []
    for li in range(num_layers):
        fan_in, fan_out = sizes[li], sizes[li + 1]
        rows = []
        for k in range(fan_out):
            line, lineno = reader.next_data_line()
            row = _parse_numbers(line, lineno)
            if len(row) != fan_in:
                raise NnetParseError(
                    f"layer {li + 1} neuron {k + 1}: expected {fan_in} weights, "
                    f"got {len(row)}",
                    lineno,
                )
            rows.append(row)
        biases = []
        for k in range(fan_out):
            line, lineno = reader.next_data_line()
            vals = _parse_numbers(line, lineno)
            if len(vals) != 1:
                raise NnetParseError(
                    f"layer {li + 1} neuron {k + 1}: expected one bias value", lineno
                )
            biases.append(vals[0])
        kind = hidden_activation if li < num_layers - 1 else output_activation
        # file rows are per-neuron fan-in weights; store fan_in x fan_out
        layers.append(Layer(np.array(rows).T, np.array(biases), kind))

    return Network(
        layers,
        name=name,
        input_mins=mins,
        input_maxes=maxes,
        means=means,
        ranges=ranges,
        sigmoid_table=sigmoid_table,
    )


def load_nnet(path, **kwargs) -> Network:
    with open(path, "r", encoding="ascii") as fh:
        return parse_nnet(fh.read(), name=str(path), **kwargs)


def serialize_nnet(net: Network) -> str:
    """Emit .nnet text that parses back to an identical network."""
    sizes = net.layer_sizes
    out = []
    out.append(f"{len(net.layers)},{net.input_size},{net.output_size},{max(sizes)},")
    out.append(",".join(str(s) for s in sizes) + ",")
    out.append("0,")
    for meta, fallback in (
        (net.input_mins, [0.0] * net.input_size),
        (net.input_maxes, [1.0] * net.input_size),
        (net.means, [0.0] * (net.input_size + 1)),
        (net.ranges, [1.0] * (net.input_size + 1)),
    ):
        vals = meta if meta is not None else fallback
        out.append(",".join(repr(float(v)) for v in vals) + ",")
    for layer in net.layers:
        for k in range(layer.fan_out):
            out.append(",".join(repr(float(w)) for w in layer.weights[:, k]) + ",")
        for k in range(layer.fan_out):
            out.append(repr(float(layer.biases[k])) + ",")
    return "\n".join(out) + "\n"
