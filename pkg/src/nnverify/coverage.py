"""Neuron covering methods over pairs of activation-potential traces.

All four methods inspect activation potentials (the pre-activation
weighted sums), never the activated outputs.  A neuron is addressed as
(layer, index), both 0-based.  Sign/sign pairs span consecutive layers;
the distance-based methods condition on a whole layer, so their covered
unit is the downstream decision neuron.

The value-change ratio is evaluated symmetrically, max|.| over min|.|,
which keeps reports independent of the order the two inputs are given
in; a zero against a nonzero value counts as changed, two zeros do not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoverConfig:
    """Thresholds: ratio d for value change, distance v, coverage goal p."""

    d: float = 1.0
    v: float = 0.1
    p: float = 0.8

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("value-change ratio threshold d must be positive")
        if self.v < 0:
            raise ValueError("distance threshold v must be nonnegative")
        if self.p < 0:
            raise ValueError("coverage goal p must be nonnegative")


METHODS = ("ss", "ds", "sv", "dv")


def _potentials(trace) -> list:
    layers = trace.potentials if hasattr(trace, "potentials") else trace
    return [np.asarray(layer, dtype=np.float64) for layer in layers]


def sign(x: float) -> int:
    """1 for x >= 0, else 0 (zero counts as the nonnegative side)."""
    return 1 if x >= 0 else 0


def sc(neuron, trace1, trace2) -> bool:
    """Signal change: the neuron's potential sign differs across inputs."""
    layer, idx = neuron
    p1, p2 = _potentials(trace1), _potentials(trace2)
    return sign(p1[layer][idx]) != sign(p2[layer][idx])


def _ratio_holds(a: float, b: float, d: float) -> bool:
    big, small = max(abs(a), abs(b)), min(abs(a), abs(b))
    if small == 0.0:
        return big > 0.0
    return big / small >= d


def vc(config: CoverConfig, neuron, trace1, trace2) -> bool:
    """Value change: no sign change, but the magnitudes differ by ratio d."""
    if sc(neuron, trace1, trace2):
        return False
    layer, idx = neuron
    a = float(_potentials(trace1)[layer][idx])
    b = float(_potentials(trace2)[layer][idx])
    return _ratio_holds(a, b, config.d)


def dc(config: CoverConfig, layer: int, trace1, trace2) -> bool:
    """Distance change: every neuron of the layer keeps its sign and
    moves by more than v in absolute value."""
    p1 = _potentials(trace1)[layer]
    p2 = _potentials(trace2)[layer]
    for a, b in zip(p1, p2):
        if sign(a) != sign(b):
            return False
        if abs(a - b) <= config.v:
            return False
    return True


def layer_distance(trace1, trace2, layer: int) -> float:
    """Euclidean distance between a layer's two potential vectors."""
    p1 = _potentials(trace1)[layer]
    p2 = _potentials(trace2)[layer]
    return float(np.sqrt(np.sum((p1 - p2) ** 2)))


def _unique_sc_in_layer(layer: int, idx: int, trace1, trace2) -> bool:
    p1 = _potentials(trace1)[layer]
    p2 = _potentials(trace2)[layer]
    for j, (a, b) in enumerate(zip(p1, p2)):
        changed = sign(a) != sign(b)
        if j == idx and not changed:
            return False
        if j != idx and changed:
            return False
    return True


def ss_cover(pair, trace1, trace2) -> bool:
    """Sign-sign: the upstream neuron is the layer's only sign change and
    the downstream neuron changes sign too."""
    (layer, idx), (dlayer, didx) = pair
    if dlayer != layer + 1:
        raise ValueError("pair must span consecutive layers")
    return _unique_sc_in_layer(layer, idx, trace1, trace2) and sc(
        (dlayer, didx), trace1, trace2
    )


def sv_cover(pair, config: CoverConfig, trace1, trace2) -> bool:
    """Sign-value: unique upstream sign change, downstream value change."""
    (layer, idx), (dlayer, didx) = pair
    if dlayer != layer + 1:
        raise ValueError("pair must span consecutive layers")
    return _unique_sc_in_layer(layer, idx, trace1, trace2) and vc(
        config, (dlayer, didx), trace1, trace2
    )


def ds_cover(neuron, layer: int, config: CoverConfig, trace1, trace2) -> bool:
    """Distance-sign: whole-layer distance change, downstream sign change."""
    dlayer, didx = neuron
    if dlayer != layer + 1:
        raise ValueError("decision neuron must sit on the next layer")
    return dc(config, layer, trace1, trace2) and sc(neuron, trace1, trace2)


def dv_cover(neuron, layer: int, config: CoverConfig, trace1, trace2) -> bool:
    """Distance-value: whole-layer distance change, downstream value change."""
    dlayer, didx = neuron
    if dlayer != layer + 1:
        raise ValueError("decision neuron must sit on the next layer")
    return dc(config, layer, trace1, trace2) and vc(config, neuron, trace1, trace2)


def covered_items(method: str, config: CoverConfig, trace1, trace2) -> list:
    """All covered units for one trace pair.

    ss/sv yield (upstream, downstream) neuron pairs; ds/dv yield
    (layer, downstream) because their layer condition has no single
    upstream participant.
    """
    p1 = _potentials(trace1)
    p2 = _potentials(trace2)
    if len(p1) != len(p2) or any(len(a) != len(b) for a, b in zip(p1, p2)):
        raise ValueError("traces come from different network shapes")
    items = []
    nlayers = len(p1)
    for layer in range(nlayers - 1):
        down_width = len(p1[layer + 1])
        if method in ("ss", "sv"):
            for i in range(len(p1[layer])):
                if not _unique_sc_in_layer(layer, i, trace1, trace2):
                    continue
                for k in range(down_width):
                    pair = ((layer, i), (layer + 1, k))
                    if method == "ss" and sc((layer + 1, k), trace1, trace2):
                        items.append(pair)
                    elif method == "sv" and vc(config, (layer + 1, k), trace1, trace2):
                        items.append(pair)
        elif method in ("ds", "dv"):
            if not dc(config, layer, trace1, trace2):
                continue
            for k in range(down_width):
                neuron = (layer + 1, k)
                if method == "ds" and sc(neuron, trace1, trace2):
                    items.append((layer, neuron))
                elif method == "dv" and vc(config, neuron, trace1, trace2):
                    items.append((layer, neuron))
        else:
            raise ValueError(f"unknown covering method {method!r}")
    return items


def _covered_neurons(method: str, items) -> set:
    neurons = set()
    for item in items:
        if method in ("ss", "sv"):
            up, down = item
            neurons.add(up)
            neurons.add(down)
        else:
            _layer, down = item
            neurons.add(down)
    return neurons


@dataclass
class CoverageReport:
    method: str
    covered_pairs: list
    covered_neurons: list
    total_neurons: int
    ratio: float
    literal: bool
    config: CoverConfig
    pairs_evaluated: int = 0

    def to_json(self) -> dict:
        pairs = []
        for item in self.covered_pairs:
            if self.method in ("ss", "sv"):
                up, down = item
                pairs.append({"upstream": list(up), "downstream": list(down)})
            else:
                layer, down = item
                pairs.append({"layer": layer, "downstream": list(down)})
        return {
            "method": self.method,
            "config": {"d": self.config.d, "v": self.config.v, "p": self.config.p},
            "pairs_evaluated": self.pairs_evaluated,
            "covered_pairs": pairs,
            "covered_neurons": [list(n) for n in self.covered_neurons],
            "total_neurons": self.total_neurons,
            "ratio": self.ratio,
            "literal": self.literal,
        }


def coverage_report(method: str, trace_pairs, config: CoverConfig) -> CoverageReport:
    """Coverage over one or many trace pairs.

    A neuron counts as covered once it participates in any covered unit
    of any pair; the ratio divides by the network's total neuron count
    and the literal compares it against the configured goal p.
    """
    if method not in METHODS:
        raise ValueError(f"unknown covering method {method!r}")
    if isinstance(trace_pairs, tuple) and len(trace_pairs) == 2:
        trace_pairs = [trace_pairs]
    trace_pairs = list(trace_pairs)
    if not trace_pairs:
        raise ValueError("coverage needs at least one trace pair")
    nt = sum(len(layer) for layer in _potentials(trace_pairs[0][0]))
    all_items = []
    neurons = set()
    for t1, t2 in trace_pairs:
        items = covered_items(method, config, t1, t2)
        all_items.extend(it for it in items if it not in all_items)
        neurons |= _covered_neurons(method, items)
    ratio = len(neurons) / nt
    return CoverageReport(
        method=method,
        covered_pairs=all_items,
        covered_neurons=sorted(neurons),
        total_neurons=nt,
        ratio=ratio,
        literal=ratio >= config.p,
        config=config,
        pairs_evaluated=len(trace_pairs),
    )


# ---------------------------------------------------------------------------
# Possibility analysis for the coverage-goal search
# ---------------------------------------------------------------------------


def _possible_signs(lo: float, hi: float) -> set:
    signs = set()
    if hi >= 0:
        signs.add(1)
    if lo < 0:
        signs.add(0)
    return signs


def _ratio_possible(base: float, lo: float, hi: float, d: float) -> bool:
    # max over the interval of the symmetric ratio against the base value
    abs_lo = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
    abs_hi = max(abs(lo), abs(hi))
    a = abs(base)
    if a == 0.0:
        return abs_hi > 0.0
    if abs_lo == 0.0:
        return True
    best = max(max(a, abs_hi) / min(a, abs_hi), max(a, abs_lo) / min(a, abs_lo))
    return best >= d


def max_coverage_ratio(
    method: str,
    config: CoverConfig,
    base_potentials,
    potential_bounds,
) -> float:
    """Upper bound on the coverage any single input in a region can reach.

    Uses three-valued sign reasoning over per-neuron potential intervals:
    a predicate is counted when every conjunct is still possible, so the
    result dominates the true coverage of every concrete input and can
    prune subtrees once it drops below the goal.
    """
    base = _potentials(base_potentials)
    nt = sum(len(layer) for layer in base)
    bounds = potential_bounds

    def sc_possible(layer, idx):
        lo, hi = float(bounds[layer].los[idx]), float(bounds[layer].his[idx])
        other = 1 - sign(base[layer][idx])
        return other in _possible_signs(lo, hi)

    def keep_possible(layer, idx):
        lo, hi = float(bounds[layer].los[idx]), float(bounds[layer].his[idx])
        return sign(base[layer][idx]) in _possible_signs(lo, hi)

    def vc_possible(layer, idx):
        if not keep_possible(layer, idx):
            return False
        lo, hi = float(bounds[layer].los[idx]), float(bounds[layer].his[idx])
        return _ratio_possible(float(base[layer][idx]), lo, hi, config.d)

    def dc_possible(layer):
        for idx in range(len(base[layer])):
            if not keep_possible(layer, idx):
                return False
            lo, hi = float(bounds[layer].los[idx]), float(bounds[layer].his[idx])
            b = float(base[layer][idx])
            if max(abs(lo - b), abs(hi - b)) <= config.v:
                return False
        return True

    neurons = set()
    nlayers = len(base)
    for layer in range(nlayers - 1):
        down_width = len(base[layer + 1])
        if method in ("ss", "sv"):
            for i in range(len(base[layer])):
                if not sc_possible(layer, i):
                    continue
                others_ok = all(
                    keep_possible(layer, j)
                    for j in range(len(base[layer]))
                    if j != i
                )
                if not others_ok:
                    continue
                for k in range(down_width):
                    hit = (
                        sc_possible(layer + 1, k)
                        if method == "ss"
                        else vc_possible(layer + 1, k)
                    )
                    if hit:
                        neurons.add((layer, i))
                        neurons.add((layer + 1, k))
        else:
            if not dc_possible(layer):
                continue
            for k in range(down_width):
                hit = (
                    sc_possible(layer + 1, k)
                    if method == "ds"
                    else vc_possible(layer + 1, k)
                )
                if hit:
                    neurons.add((layer + 1, k))
    return len(neurons) / nt
