"""Rectangular interval bounds over network layers.

Two propagators live here.  The float propagator computes the classic
tight affine image per layer and backs the soundness checks against the
float oracle; its bounds are nudged outward by a relative guard so that
summation-order differences in the double-precision forward pass can
never land a concrete value epsilon-outside.  The fixed-point propagator
mirrors the operational model step by step (same rounding, same
saturating accumulation order), so its bounds are sound for the
quantized pipeline by construction, including intermediate saturation.

A separate quantization-error inflation is provided for analyses that
want float bounds plus an analytic error margin: with round-to-nearest,
every product rounds by at most 2**-(F+1) and the bias quantizes once,
so a layer with n inputs in [0, 1] deviates from the real affine image
by at most (n + 1) * 2**-(F+1) when weights are pre-quantized.  That
margin is valid only while no saturation occurs; the mirror propagator
has no such caveat.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from nnverify import fxp
from nnverify.fxp import FxpFormat, Rounding
from nnverify.fxpnet import QuantizedNetwork, _activate_raw, _add_raw, _mul_raw
from nnverify.nets import ActivationKind, Layer, Network, SigmoidTable

# Outward guard against double rounding-order differences.
_REL_GUARD = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class Box:
    """A vector of intervals, one per dimension."""

    def __init__(self, los, his):
        self.los = np.asarray(los, dtype=np.float64).copy()
        self.his = np.asarray(his, dtype=np.float64).copy()
        if self.los.shape != self.his.shape or self.los.ndim != 1 or self.los.size == 0:
            raise ValueError("box needs matching, nonempty lo/hi vectors")
        if np.any(self.los > self.his):
            raise ValueError("box has an empty dimension")

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        return cls([iv.lo for iv in intervals], [iv.hi for iv in intervals])

    @classmethod
    def from_point(cls, point) -> "Box":
        return cls(point, point)

    @classmethod
    def from_pairs(cls, pairs) -> "Box":
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __len__(self) -> int:
        return self.los.size

    def __getitem__(self, i: int) -> Interval:
        return Interval(float(self.los[i]), float(self.his[i]))

    def intervals(self) -> list:
        return [self[i] for i in range(len(self))]

    @property
    def widths(self) -> np.ndarray:
        return self.his - self.los

    def contains(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(
            np.all(x >= self.los - slack) and np.all(x <= self.his + slack)
        )

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.los, self.his)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.los, other.los) and np.array_equal(
            self.his, other.his
        )

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{l}, {h}]" for l, h in zip(self.los, self.his))
        return f"Box({pairs})"


@dataclass
class LayerBounds:
    """Potential and output interval vectors, one Box per layer."""

    potentials: list
    outputs: list

    def contains_trace(self, potentials, outputs, slack: float = 0.0) -> bool:
        for bound, values in zip(self.potentials, potentials):
            if not bound.contains(values, slack):
                return False
        for bound, values in zip(self.outputs, outputs):
            if not bound.contains(values, slack):
                return False
        return True


def _guard_outward(los: np.ndarray, his: np.ndarray):
    pad_lo = np.abs(los) * _REL_GUARD
    pad_hi = np.abs(his) * _REL_GUARD
    return los - pad_lo, his + pad_hi


def propagate_affine(layer: Layer, box: Box) -> Box:
    """Tight interval image of the affine map: per-term min/max plus bias."""
    if len(box) != layer.fan_in:
        raise ValueError(f"box dimension {len(box)} != fan-in {layer.fan_in}")
    w = layer.weights
    lo_terms = np.minimum(w * box.los[:, None], w * box.his[:, None])
    hi_terms = np.maximum(w * box.los[:, None], w * box.his[:, None])
    los = lo_terms.sum(axis=0) + layer.biases
    his = hi_terms.sum(axis=0) + layer.biases
    los, his = _guard_outward(los, his)
    return Box(los, his)


def propagate_activation(
    kind: ActivationKind, box: Box, table: Optional[SigmoidTable] = None
) -> Box:
    """Interval image of a monotone activation, clamped to its range."""
    if kind is ActivationKind.IDENTITY:
        return Box(box.los, box.his)
    if kind is ActivationKind.RELU:
        return Box(np.maximum(box.los, 0.0), np.maximum(box.his, 0.0))
    if kind is ActivationKind.SIGMOID_LUT:
        if table is None:
            table = SigmoidTable()
        los = np.array([table.lookup(v) for v in box.los])
        his = np.array([table.lookup(v) for v in box.his])
        return Box(np.clip(los, 0.0, 1.0), np.clip(his, 0.0, 1.0))
    raise ValueError(f"unsupported activation {kind}")


def propagate_network(net: Network, box: Box) -> LayerBounds:
    """Layer-by-layer bound propagation for the float semantics."""
    if len(box) != net.input_size:
        raise ValueError(f"box dimension {len(box)} != input size {net.input_size}")
    potentials, outputs = [], []
    cur = box
    for layer in net.layers:
        u = propagate_affine(layer, cur)
        y = propagate_activation(layer.activation, u, net.sigmoid_table)
        potentials.append(u)
        outputs.append(y)
        cur = y
    return LayerBounds(potentials=potentials, outputs=outputs)


def widen(box: Box, limit: Interval) -> Box:
    """Replace any interval wider than the limit by the limit itself."""
    los = box.los.copy()
    his = box.his.copy()
    for i in range(len(box)):
        if his[i] - los[i] > limit.width or not (
            np.isfinite(los[i]) and np.isfinite(his[i])
        ):
            los[i], his[i] = limit.lo, limit.hi
    return Box(los, his)


def split(
    box: Box,
    fmt: Optional[FxpFormat] = None,
    rounding: Rounding = Rounding.NEAREST_EVEN,
):
    """Bisect the widest dimension (ties to the lowest index).

    The midpoint snaps to the fixed-point grid when a format is given;
    if snapping collapses onto an endpoint the raw midpoint is kept so
    both halves stay nonempty.
    """
    widths = box.widths
    if np.all(widths <= 0.0):
        raise ValueError("cannot split a degenerate box")
    dim = int(np.argmax(widths))
    lo, hi = float(box.los[dim]), float(box.his[dim])
    mid = (lo + hi) / 2.0
    if fmt is not None:
        snapped = fxp.quantize(mid, fmt, rounding)
        if lo < snapped < hi:
            mid = snapped
    left_his = box.his.copy()
    left_his[dim] = mid
    right_los = box.los.copy()
    right_los[dim] = mid
    return Box(box.los, left_his), Box(right_los, box.his)


# ---------------------------------------------------------------------------
# Fixed-point mirror propagation
# ---------------------------------------------------------------------------


def _pipeline_raw(qnet: QuantizedNetwork, layer_idx: int, raw: int) -> int:
    """The exact per-element output path for one potential value."""
    layer = qnet.layers[layer_idx]
    scaled = _mul_raw(raw, qnet.one_raw, qnet.fmt, qnet.rounding)
    t = _activate_raw(layer.activation, scaled, qnet.fmt, qnet.table, qnet.rounding)
    return _mul_raw(t, qnet.one_raw, qnet.fmt, qnet.rounding)


def propagate_quantized(qnet: QuantizedNetwork, input_raw_bounds):
    """Raw interval propagation mirroring forward_quantized step by step.

    Each weight is a fixed raw integer, so every product interval is the
    monotone image of the input interval; accumulation clamps after each
    add exactly like the GEMM loop, which keeps the bounds sound even
    when partial sums saturate and come back.  Activation endpoints go
    through the identical element pipeline as concrete values.
    """
    fmt, rounding = qnet.fmt, qnet.rounding
    shift = 1 << fmt.frac_bits
    cur = [(int(lo), int(hi)) for lo, hi in input_raw_bounds]
    pot_bounds, out_bounds = [], []
    for li, layer in enumerate(qnet.layers):
        u = []
        for k in range(layer.fan_out):
            acc_lo = acc_hi = 0
            for j in range(layer.fan_in):
                w = layer.weights_raw[j][k]
                in_lo, in_hi = cur[j]
                if w >= 0:
                    p_lo, p_hi = w * in_lo, w * in_hi
                else:
                    p_lo, p_hi = w * in_hi, w * in_lo
                t_lo = fxp._saturate(fxp._round_quotient(p_lo, shift, rounding), fmt)
                t_hi = fxp._saturate(fxp._round_quotient(p_hi, shift, rounding), fmt)
                acc_lo = _add_raw(acc_lo, t_lo, fmt)
                acc_hi = _add_raw(acc_hi, t_hi, fmt)
            b = layer.biases_raw[k]
            u.append((_add_raw(acc_lo, b, fmt), _add_raw(acc_hi, b, fmt)))
        y = [
            (_pipeline_raw(qnet, li, lo), _pipeline_raw(qnet, li, hi)) for lo, hi in u
        ]
        pot_bounds.append(u)
        out_bounds.append(y)
        cur = y
    return pot_bounds, out_bounds


def quantized_bounds_to_real(qnet: QuantizedNetwork, raw_bounds) -> list:
    scale = 2.0 ** -qnet.fmt.frac_bits
    return [
        Box([lo * scale for lo, _ in layer], [hi * scale for _, hi in layer])
        for layer in raw_bounds
    ]


def propagate_network_fxp(
    net: Network,
    box: Box,
    fmt: FxpFormat,
    rounding: Rounding = Rounding.FLOOR,
    qnet: Optional[QuantizedNetwork] = None,
) -> LayerBounds:
    """LayerBounds that soundly contain every fixed-point trace in the box.

    The input box is first widened to the quantized images of its
    endpoints so that quantize-then-evaluate points stay inside.
    """
    if qnet is None:
        qnet = QuantizedNetwork.build(net, fmt, rounding)
    raw_in = []
    for lo, hi in zip(box.los, box.his):
        raw_lo = fxp.from_real(float(lo), fmt, rounding).raw
        raw_hi = fxp.from_real(float(hi), fmt, rounding).raw
        if rounding is Rounding.NEAREST_EVEN:
            # nearest can round either way; cover both sides of each endpoint
            raw_lo = min(raw_lo, fxp.from_real(float(lo), fmt, Rounding.FLOOR).raw)
            ceil_hi = -fxp.from_real(-float(hi), fmt, Rounding.FLOOR).raw
            raw_hi = max(raw_hi, fxp._saturate(ceil_hi, fmt))
        raw_in.append((raw_lo, raw_hi))
    pots, outs = propagate_quantized(qnet, raw_in)
    return LayerBounds(
        potentials=quantized_bounds_to_real(qnet, pots),
        outputs=quantized_bounds_to_real(qnet, outs),
    )


def quantization_margin(fan_in: int, fmt: FxpFormat) -> float:
    """Analytic per-layer error of the nearest-rounding pipeline.

    fan_in products each round by <= 2**-(F+1); the bias quantization
    adds one more half-ulp.  Valid when no saturation occurs.
    """
    return (fan_in + 1) * 2.0 ** -(fmt.frac_bits + 1)


def propagate_network_inflated(net: Network, box: Box, fmt: FxpFormat) -> LayerBounds:
    """Float bounds on quantized weights, inflated by the analytic margin.

    This is the closed-form alternative to propagate_network_fxp for the
    nearest-rounding, saturation-free regime: real-arithmetic bounds are
    widened per layer by quantization_margin before each activation.
    """
    quantized_layers = []
    for layer in net.layers:
        wq = np.vectorize(lambda v: fxp.quantize(float(v), fmt))(layer.weights)
        bq = np.vectorize(lambda v: fxp.quantize(float(v), fmt))(layer.biases)
        quantized_layers.append(Layer(wq, bq, layer.activation))
    qnet_real = Network(
        quantized_layers, sigmoid_table=net.sigmoid_table, name=net.name
    )
    half_ulp = 2.0 ** -(fmt.frac_bits + 1)
    potentials, outputs = [], []
    # inputs themselves quantize to within half an ulp of the box
    cur = Box(box.los - half_ulp, box.his + half_ulp)
    for layer in qnet_real.layers:
        u = propagate_affine(layer, cur)
        margin = quantization_margin(layer.fan_in, fmt)
        u = Box(u.los - margin, u.his + margin)
        y = propagate_activation(layer.activation, u, qnet_real.sigmoid_table)
        # table entries quantize once more on the fixed-point side
        if layer.activation is ActivationKind.SIGMOID_LUT:
            y = Box(np.maximum(y.los - half_ulp, 0.0), y.his + half_ulp)
        elif layer.activation is not ActivationKind.IDENTITY:
            y = Box(y.los - half_ulp, y.his + half_ulp)
        potentials.append(u)
        outputs.append(y)
        cur = y
    return LayerBounds(potentials=potentials, outputs=outputs)
