"""Fixed-point operational models of the dense-layer primitives.

gemm_fxp accumulates strictly left to right with saturation after every
add, because saturating addition is not associative and the point of the
model is bit-exact reproducibility.  activation_forward_fxp applies the
two-step alpha/beta scaling around the element-wise activation.

The default rounding here is floor (arithmetic-shift semantics), which
is what deployed conversion pipelines do; pass Rounding.NEAREST_EVEN to
model a nearest-rounding target instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nnverify import fxp
from nnverify.fxp import FxpFormat, FxpValue, Rounding
from nnverify.nets import (
    ActivationKind,
    Network,
    SigmoidTable,
    classify,
    forward_float,
)

DEFAULT_ROUNDING = Rounding.FLOOR


def _mul_raw(a: int, b: int, fmt: FxpFormat, rounding: Rounding) -> int:
    raw = fxp._round_quotient(a * b, 1 << fmt.frac_bits, rounding)
    return fxp._saturate(raw, fmt)


def _add_raw(a: int, b: int, fmt: FxpFormat) -> int:
    return fxp._saturate(a + b, fmt)


def gemm_fxp(a, b, fmt: FxpFormat, rounding: Rounding = DEFAULT_ROUNDING):
    """Multiply FxpValue matrices a (k x j) and b (j x i) into c (k x i)."""
    rows_a = len(a)
    inner = len(a[0]) if rows_a else 0
    if any(len(row) != inner for row in a):
        raise ValueError("matrix a is ragged")
    if len(b) != inner:
        raise ValueError(f"inner dimensions disagree: {inner} vs {len(b)}")
    cols_b = len(b[0]) if inner else 0
    for row in a:
        for v in row:
            if v.fmt != fmt:
                raise fxp.FormatMismatchError(f"a entry format {v.fmt} != {fmt}")
    for row in b:
        if len(row) != cols_b:
            raise ValueError("matrix b is ragged")
        for v in row:
            if v.fmt != fmt:
                raise fxp.FormatMismatchError(f"b entry format {v.fmt} != {fmt}")
    c = []
    for x in range(rows_a):
        out_row = []
        for y in range(cols_b):
            acc = 0
            for z in range(inner):
                term = _mul_raw(a[x][z].raw, b[z][y].raw, fmt, rounding)
                acc = _add_raw(acc, term, fmt)
            out_row.append(FxpValue(acc, fmt))
        c.append(out_row)
    return c


def _activate_raw(
    kind: ActivationKind,
    raw: int,
    fmt: FxpFormat,
    table: SigmoidTable | None,
    rounding: Rounding,
) -> int:
    if kind is ActivationKind.IDENTITY:
        return raw
    if kind is ActivationKind.RELU:
        return raw if raw > 0 else 0
    if kind is ActivationKind.SIGMOID_LUT:
        if table is None:
            raise ValueError("sigmoid activation requires a lookup table")
        index = table.index_of_raw(raw, fmt.frac_bits)
        entry = table.lookup_index(index)
        return fxp.from_real(entry, fmt, rounding).raw
    raise ValueError(f"unsupported activation kind {kind}")


def activation_forward_fxp(
    kind: ActivationKind,
    alpha: FxpValue,
    beta: FxpValue,
    inputs,
    table: SigmoidTable | None = None,
    rounding: Rounding = DEFAULT_ROUNDING,
):
    """Element-wise activation with alpha/beta scaling.

    Per element: t = activation(input * alpha); output = t * beta, both
    products in saturating fixed point.
    """
    fmt = alpha.fmt
    if beta.fmt != fmt:
        raise fxp.FormatMismatchError("alpha and beta formats differ")
    out = []
    for v in inputs:
        if v.fmt != fmt:
            raise fxp.FormatMismatchError("input format differs from alpha/beta")
        scaled = _mul_raw(v.raw, alpha.raw, fmt, rounding)
        t = _activate_raw(kind, scaled, fmt, table, rounding)
        out.append(FxpValue(_mul_raw(t, beta.raw, fmt, rounding), fmt))
    return out


@dataclass
class QuantizedLayer:
    weights_raw: list  # fan_in x fan_out raw integers
    biases_raw: list
    activation: ActivationKind

    @property
    def fan_in(self) -> int:
        return len(self.weights_raw)

    @property
    def fan_out(self) -> int:
        return len(self.biases_raw)


@dataclass
class QuantizedNetwork:
    """A network with weights and biases quantized once, up front."""

    layers: list
    fmt: FxpFormat
    rounding: Rounding
    table: SigmoidTable | None
    one_raw: int

    @classmethod
    def build(
        cls, net: Network, fmt: FxpFormat, rounding: Rounding = DEFAULT_ROUNDING
    ) -> "QuantizedNetwork":
        layers = []
        for layer in net.layers:
            w = [
                [fxp.from_real(float(v), fmt, rounding).raw for v in row]
                for row in layer.weights
            ]
            b = [fxp.from_real(float(v), fmt, rounding).raw for v in layer.biases]
            layers.append(QuantizedLayer(w, b, layer.activation))
        table = net.sigmoid_table
        if table is None and any(
            l.activation is ActivationKind.SIGMOID_LUT for l in net.layers
        ):
            table = SigmoidTable()
        return cls(
            layers=layers,
            fmt=fmt,
            rounding=rounding,
            table=table,
            one_raw=fxp.from_real(1.0, fmt, rounding).raw,
        )


@dataclass
class FxpTrace:
    """Raw and real-valued views of a fixed-point forward pass."""

    input_raw: list
    potentials_raw: list
    outputs_raw: list
    fmt: FxpFormat

    def _real(self, raws) -> list:
        scale = 2.0 ** -self.fmt.frac_bits
        return [np.array([r * scale for r in layer]) for layer in raws]

    @property
    def input(self) -> np.ndarray:
        scale = 2.0 ** -self.fmt.frac_bits
        return np.array([r * scale for r in self.input_raw])

    @property
    def potentials(self) -> list:
        return self._real(self.potentials_raw)

    @property
    def outputs(self) -> list:
        return self._real(self.outputs_raw)

    @property
    def final_outputs(self) -> np.ndarray:
        return self.outputs[-1]


def forward_quantized(qnet: QuantizedNetwork, input_raw) -> FxpTrace:
    """Forward pass over pre-quantized parameters and raw input values."""
    fmt, rounding, table = qnet.fmt, qnet.rounding, qnet.table
    one = qnet.one_raw
    cur = list(input_raw)
    potentials, outputs = [], []
    for layer in qnet.layers:
        u = []
        for k in range(layer.fan_out):
            acc = 0
            for j in range(layer.fan_in):
                term = _mul_raw(cur[j], layer.weights_raw[j][k], fmt, rounding)
                acc = _add_raw(acc, term, fmt)
            u.append(_add_raw(acc, layer.biases_raw[k], fmt))
        y = []
        for raw in u:
            scaled = _mul_raw(raw, one, fmt, rounding)
            t = _activate_raw(layer.activation, scaled, fmt, table, rounding)
            y.append(_mul_raw(t, one, fmt, rounding))
        potentials.append(u)
        outputs.append(y)
        cur = y
    return FxpTrace(
        input_raw=list(input_raw),
        potentials_raw=potentials,
        outputs_raw=outputs,
        fmt=fmt,
    )


def forward_fxp(
    net: Network,
    inputs,
    fmt: FxpFormat,
    rounding: Rounding = DEFAULT_ROUNDING,
    qnet: QuantizedNetwork | None = None,
) -> FxpTrace:
    """Quantize everything once, then run the fixed-point pipeline."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (net.input_size,):
        raise ValueError(f"expected {net.input_size} inputs, got {x.shape}")
    if qnet is None:
        qnet = QuantizedNetwork.build(net, fmt, rounding)
    input_raw = [fxp.from_real(float(v), fmt, rounding).raw for v in x]
    return forward_quantized(qnet, input_raw)


def conformance_diff(
    net: Network,
    inputs,
    fmt: FxpFormat,
    rounding: Rounding = DEFAULT_ROUNDING,
    threshold: float = 0.5,
) -> dict:
    """Compare the fixed-point pipeline against the float oracle.

    Deviations are measured over every potential and output of every
    layer; a classification flip is any disagreement between the float
    and fixed-point argmax-over-threshold decisions.
    """
    qnet = QuantizedNetwork.build(net, fmt, rounding)
    per_input = []
    flips = 0
    all_max = 0.0
    dev_sum = 0.0
    dev_count = 0
    for x in inputs:
        x = np.asarray(x, dtype=np.float64)
        ft = forward_float(net, x)
        qt = forward_fxp(net, x, fmt, rounding, qnet=qnet)
        devs = []
        for fu, qu in zip(ft.potentials, qt.potentials):
            devs.append(np.abs(fu - qu))
        for fy, qy in zip(ft.outputs, qt.outputs):
            devs.append(np.abs(fy - qy))
        flat = np.concatenate(devs)
        cls_f = classify(ft, threshold)
        cls_q = classify(qt, threshold)
        flip = cls_f != cls_q
        flips += int(flip)
        all_max = max(all_max, float(flat.max()))
        dev_sum += float(flat.sum())
        dev_count += flat.size
        per_input.append(
            {
                "input": [float(v) for v in x],
                "max_abs_dev": float(flat.max()),
                "mean_abs_dev": float(flat.mean()),
                "class_float": cls_f,
                "class_fxp": cls_q,
                "classification_flip": flip,
            }
        )
    return {
        "format": str(fmt),
        "rounding": rounding.value,
        "per_input": per_input,
        "summary": {
            "inputs": len(per_input),
            "max_abs_dev": all_max,
            "mean_abs_dev": (dev_sum / dev_count) if dev_count else 0.0,
            "classification_flips": flips,
        },
    }
