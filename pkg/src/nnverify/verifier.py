"""Incremental branch-and-bound verification over the fixed-point grid.

The search object is the network function restricted to exactly
representable inputs: each region dimension becomes a finite list of
grid values (format grid intersected with an optional coarser user
grid), and the search bisects index ranges.  The depth parameter k
bounds how many bisections a path may take, so iterating k upward gives
the incremental scheme: a violation within depth k is a counterexample,
full resolution at depth k proves safety, otherwise deepen.

Pruning is twofold and both rules are sound: boxes whose minimal
distance to the base exceeds the allowed radius contain no admissible
input, and boxes whose propagated bounds already certify the property
cannot contain a witness.  Bound propagation mirrors the fixed-point
pipeline bit-for-bit, so pruning never changes a verdict, only the
node count.  Exploration is left-first depth-first; with a single
worker the verdict, witness and statistics are reproducible runs apart.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from nnverify import fxp
from nnverify.coverage import CoverConfig, coverage_report, max_coverage_ratio
from nnverify.fxp import FxpFormat, Rounding
from nnverify.fxpnet import QuantizedNetwork, forward_quantized
from nnverify.intervals import (
    Box,
    propagate_network,
    propagate_quantized,
    quantized_bounds_to_real,
)
from nnverify.nets import Network, forward_float


class VerifierError(Exception):
    """Infeasible regions, bad property definitions and the like."""


class _BudgetExhausted(Exception):
    pass


# ---------------------------------------------------------------------------
# Properties and regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialRobustness:
    """Misclassification literal: the expected output neuron drops below
    the threshold while some competing neuron reaches it."""

    base: tuple
    gamma: float
    expected_class: int
    threshold: float = 0.5

    def __post_init__(self):
        if self.gamma < 0 or not math.isfinite(self.gamma):
            raise VerifierError("gamma must be finite and nonnegative")
        if self.expected_class < 0:
            raise VerifierError("expected_class must be a valid output index")


@dataclass(frozen=True)
class OutputThreshold:
    """A bound on one neuron's value: relation '<=' means the value must
    stay at or below the bound, '>=' at or above."""

    neuron: int
    bound: float
    relation: str = "<="
    layer: Optional[int] = None

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise VerifierError(f"relation must be '<=' or '>=', got {self.relation!r}")
        if not math.isfinite(self.bound):
            raise VerifierError("bound must be finite")


@dataclass(frozen=True)
class CoverageGoal:
    """Search for an input whose pairing with the base reaches coverage p."""

    method: str
    p: float
    base: tuple
    d: float = 1.0
    v: float = 0.1


@dataclass
class Region:
    """Per-dimension bounds plus an optional distance constraint."""

    box: Box
    base: Optional[np.ndarray] = None
    gamma: Optional[float] = None
    grid_step: Optional[float] = None

    def __post_init__(self):
        if self.base is not None:
            self.base = np.asarray(self.base, dtype=np.float64)
            if self.gamma is None:
                raise VerifierError("a distance constraint needs gamma")
            if not math.isfinite(self.gamma) or self.gamma < 0:
                raise VerifierError("gamma must be finite and nonnegative")

    @classmethod
    def point(cls, values) -> "Region":
        return cls(box=Box.from_point(np.asarray(values, dtype=np.float64)))


def euclidean_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(np.sqrt(np.sum((p - q) ** 2)))


def _dist2_exact(p, q) -> Fraction:
    total = Fraction(0)
    for a, b in zip(p, q):
        diff = Fraction(float(a)) - Fraction(float(b))
        total += diff * diff
    return total


def in_region(x, region: Region) -> bool:
    """Box membership plus the exact-rational distance test."""
    x = np.asarray(x, dtype=np.float64)
    if not region.box.contains(x):
        return False
    if region.base is None:
        return True
    gamma = Fraction(float(region.gamma))
    return _dist2_exact(region.base, x) <= gamma * gamma


# ---------------------------------------------------------------------------
# The search grid
# ---------------------------------------------------------------------------


def _frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


class _Grid:
    """Per-dimension sorted candidate values.

    In fixed-point mode values are raw integers; in float-oracle mode
    they are the user-grid reals themselves.
    """

    def __init__(self, dims, fmt: Optional[FxpFormat]):
        self.dims = dims
        self.fmt = fmt
        self.counts = [len(d) for d in dims]
        if any(c == 0 for c in self.counts):
            raise VerifierError("region contains no representable grid point")

    def value(self, dim: int, idx: int) -> float:
        v = self.dims[dim][idx]
        if self.fmt is not None:
            return v * 2.0 ** -self.fmt.frac_bits
        return float(v)

    def full_depth(self) -> int:
        return sum(max(1, math.ceil(math.log2(c))) if c > 1 else 0 for c in self.counts)


def build_grid(
    region: Region,
    fmt: Optional[FxpFormat],
    rounding: Rounding = Rounding.FLOOR,
) -> _Grid:
    dims = []
    for lo, hi in zip(region.box.los, region.box.his):
        lo_f, hi_f = float(lo), float(hi)
        if fmt is None:
            if lo_f == hi_f:
                dims.append([lo_f])
                continue
            if region.grid_step is None:
                raise VerifierError(
                    "a continuous region needs a fixed-point format or a grid step"
                )
            step = Fraction(region.grid_step)
            n = _frac_floor((Fraction(hi_f) - Fraction(lo_f)) / step)
            dims.append([float(Fraction(lo_f) + i * step) for i in range(n + 1)])
            continue
        scale = 1 << fmt.frac_bits
        if region.grid_step is not None:
            step = Fraction(region.grid_step)
            n = _frac_floor((Fraction(hi_f) - Fraction(lo_f)) / step)
            raws = []
            for i in range(n + 1):
                raw = fxp.from_real(Fraction(lo_f) + i * step, fmt, rounding).raw
                if Fraction(lo_f) <= Fraction(raw, scale) <= Fraction(hi_f):
                    if not raws or raws[-1] != raw:
                        raws.append(raw)
            if not raws:
                mid = (Fraction(lo_f) + Fraction(hi_f)) / 2
                raws = [fxp.from_real(mid, fmt, rounding).raw]
        else:
            lo_raw = max(_frac_ceil(Fraction(lo_f) * scale), fmt.raw_min)
            hi_raw = min(_frac_floor(Fraction(hi_f) * scale), fmt.raw_max)
            if lo_raw > hi_raw:
                # sub-resolution dimension: use the quantized representative
                mid = (Fraction(lo_f) + Fraction(hi_f)) / 2
                raws = [fxp.from_real(mid, fmt, rounding).raw]
            else:
                raws = list(range(lo_raw, hi_raw + 1))
        dims.append(raws)
    return _Grid(dims, fmt)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class Status(enum.Enum):
    SAFE = "SAFE"
    UNSAFE = "UNSAFE"
    UNKNOWN = "UNKNOWN"


@dataclass
class SearchStats:
    nodes_explored: int = 0
    nodes_pruned_invariant: int = 0
    nodes_pruned_region: int = 0
    leaves_evaluated: int = 0
    k_final: int = 0
    wall_time_s: float = 0.0
    budget: int = 0
    budget_exhausted: bool = False

    def to_json(self) -> dict:
        return {
            "nodes_explored": self.nodes_explored,
            "nodes_pruned_invariant": self.nodes_pruned_invariant,
            "nodes_pruned_region": self.nodes_pruned_region,
            "leaves_evaluated": self.leaves_evaluated,
            "k_final": self.k_final,
            "wall_time_s": self.wall_time_s,
            "budget": self.budget,
            "budget_exhausted": self.budget_exhausted,
        }


@dataclass
class Counterexample:
    input: tuple
    input_raw: Optional[tuple]
    fmt: Optional[FxpFormat]
    rounding: Optional[Rounding]
    fxp_trace: Optional[dict]
    float_trace: dict
    violation: str
    delta_to_base: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "input": list(self.input),
            "input_raw": list(self.input_raw) if self.input_raw else None,
            "format": str(self.fmt) if self.fmt else None,
            "rounding": self.rounding.value if self.rounding else None,
            "fxp_trace": self.fxp_trace,
            "float_trace": self.float_trace,
            "violation": self.violation,
            "delta_to_base": self.delta_to_base,
        }


@dataclass
class Verdict:
    status: Status
    counterexample: Optional[Counterexample]
    stats: SearchStats

    @property
    def exit_code(self) -> int:
        return {Status.SAFE: 0, Status.UNSAFE: 1, Status.UNKNOWN: 2}[self.status]

    def to_json(self) -> dict:
        return {
            "verdict": self.status.value,
            "counterexample": (
                self.counterexample.to_json() if self.counterexample else None
            ),
            "statistics": self.stats.to_json(),
        }


@dataclass
class VerifyConfig:
    max_depth: Optional[int] = None
    budget: int = 10_000_000
    granularity: int = 1
    use_invariants: bool = True
    rounding: Rounding = Rounding.FLOOR
    workers: int = 1


# ---------------------------------------------------------------------------
# Property drivers
# ---------------------------------------------------------------------------


def check_adversarial(trace, prop: AdversarialRobustness) -> bool:
    """True iff the trace violates the classification literal."""
    outs = np.asarray(trace.final_outputs)
    if prop.expected_class >= outs.size:
        raise VerifierError("expected_class outside the output layer")
    if outs[prop.expected_class] >= prop.threshold:
        return False
    others = np.delete(outs, prop.expected_class)
    return bool(np.any(others >= prop.threshold))


class _Driver:
    """Evaluates violation on traces and safety on propagated bounds."""

    def violated(self, trace) -> tuple:
        raise NotImplementedError

    def box_safe(self, bounds) -> bool:
        raise NotImplementedError


class _AdversarialDriver(_Driver):
    def __init__(self, prop: AdversarialRobustness):
        self.prop = prop

    def violated(self, trace):
        if check_adversarial(trace, self.prop):
            outs = np.asarray(trace.final_outputs)
            return True, (
                f"output[{self.prop.expected_class}]={outs[self.prop.expected_class]!r}"
                f" < {self.prop.threshold} while a competitor fired"
            )
        return False, ""

    def box_safe(self, bounds):
        out = bounds.outputs[-1]
        d = self.prop.expected_class
        if out.los[d] >= self.prop.threshold:
            return True
        highs = np.delete(out.his, d)
        return bool(np.all(highs < self.prop.threshold))


class _ThresholdDriver(_Driver):
    def __init__(self, prop: OutputThreshold, net: Network):
        self.prop = prop
        self.layer = prop.layer if prop.layer is not None else len(net.layers) - 1
        if not 0 <= self.layer < len(net.layers):
            raise VerifierError(f"layer {prop.layer} out of range")
        if not 0 <= prop.neuron < net.layers[self.layer].fan_out:
            raise VerifierError(f"neuron {prop.neuron} out of range")

    def violated(self, trace):
        value = float(trace.outputs[self.layer][self.prop.neuron])
        if self.prop.relation == "<=":
            bad = value > self.prop.bound
        else:
            bad = value < self.prop.bound
        if bad:
            return True, (
                f"layer {self.layer} neuron {self.prop.neuron} value {value!r} "
                f"violates {self.prop.relation} {self.prop.bound}"
            )
        return False, ""

    def box_safe(self, bounds):
        out = bounds.outputs[self.layer]
        if self.prop.relation == "<=":
            return bool(out.his[self.prop.neuron] <= self.prop.bound)
        return bool(out.los[self.prop.neuron] >= self.prop.bound)


class _CoverageGoalDriver(_Driver):
    def __init__(self, goal: CoverageGoal, base_trace):
        self.goal = goal
        self.base_trace = base_trace
        self.cfg = CoverConfig(d=goal.d, v=goal.v, p=goal.p)

    def violated(self, trace):
        report = coverage_report(
            self.goal.method, (self.base_trace, trace), self.cfg
        )
        if report.ratio >= self.goal.p:
            return True, (
                f"{self.goal.method} coverage {report.ratio:.4f} reaches goal "
                f"{self.goal.p}"
            )
        return False, ""

    def box_safe(self, bounds):
        best = max_coverage_ratio(
            self.goal.method, self.cfg, self.base_trace, bounds.potentials
        )
        return best < self.goal.p


# ---------------------------------------------------------------------------
# The search
# ---------------------------------------------------------------------------


class _Search:
    def __init__(
        self,
        net: Network,
        driver: Optional[_Driver],
        region: Region,
        grid: _Grid,
        fmt: Optional[FxpFormat],
        config: VerifyConfig,
        stats: SearchStats,
    ):
        self.net = net
        self.driver = driver
        self.region = region
        self.grid = grid
        self.fmt = fmt
        self.config = config
        self.stats = stats
        self.qnet = (
            QuantizedNetwork.build(net, fmt, config.rounding) if fmt is not None else None
        )
        if region.base is not None:
            self.gamma2 = Fraction(float(region.gamma)) ** 2
            # box-level pruning compares in floats with conservative slack;
            # the exact rational test runs only on concrete leaves
            self.gamma2_slack = float(self.gamma2) * (1 + 1e-9) + 1e-12
        else:
            self.gamma2 = None
            self.gamma2_slack = None

    # node = list of (start, end) inclusive index ranges
    def root(self):
        return [(0, c - 1) for c in self.grid.counts]

    def is_point(self, node) -> bool:
        return all(a == b for a, b in node)

    def point_values(self, node):
        return [self.grid.value(d, a) for d, (a, _) in enumerate(node)]

    def node_box(self, node) -> Box:
        los = [self.grid.value(d, a) for d, (a, _) in enumerate(node)]
        his = [self.grid.value(d, b) for d, (_, b) in enumerate(node)]
        return Box(los, his)

    def min_dist2(self, node) -> float:
        total = 0.0
        for d, (a, b) in enumerate(node):
            lo, hi = self.grid.value(d, a), self.grid.value(d, b)
            base = float(self.region.base[d])
            gap = max(0.0, lo - base, base - hi)
            total += gap * gap
        return total

    def split_node(self, node):
        counts = [b - a + 1 for a, b in node]
        dim = max(range(len(counts)), key=lambda i: (counts[i], -i))
        a, b = node[dim]
        mid = a + (b - a + 1) // 2 - 1
        left = list(node)
        right = list(node)
        left[dim] = (a, mid)
        right[dim] = (mid + 1, b)
        return left, right

    def eval_point(self, node):
        values = self.point_values(node)
        if self.region.base is not None:
            if _dist2_exact(self.region.base, values) > self.gamma2:
                return None
        self.stats.leaves_evaluated += 1
        if self.qnet is not None:
            raws = [self.grid.dims[d][a] for d, (a, _) in enumerate(node)]
            trace = forward_quantized(self.qnet, raws)
        else:
            trace = forward_float(self.net, values)
        bad, why = self.driver.violated(trace)
        if not bad:
            return None
        return self._make_counterexample(values, trace, why)

    def _make_counterexample(self, values, trace, why) -> Counterexample:
        float_trace = forward_float(self.net, values)
        delta = (
            euclidean_distance(self.region.base, values)
            if self.region.base is not None
            else None
        )
        fxp_blob = None
        raw_in = None
        if self.qnet is not None:
            fxp_blob = {
                "format": str(self.fmt),
                "potentials": [[float(v) for v in lay] for lay in trace.potentials],
                "outputs": [[float(v) for v in lay] for lay in trace.outputs],
                "potentials_raw": trace.potentials_raw,
                "outputs_raw": trace.outputs_raw,
            }
            raw_in = tuple(trace.input_raw)
        return Counterexample(
            input=tuple(float(v) for v in values),
            input_raw=raw_in,
            fmt=self.fmt,
            rounding=self.config.rounding if self.fmt else None,
            fxp_trace=fxp_blob,
            float_trace={
                "potentials": [[float(v) for v in lay] for lay in float_trace.potentials],
                "outputs": [[float(v) for v in lay] for lay in float_trace.outputs],
            },
            violation=why,
            delta_to_base=delta,
        )

    def node_bounds(self, node):
        if self.qnet is not None:
            raw_bounds = [
                (self.grid.dims[d][a], self.grid.dims[d][b])
                for d, (a, b) in enumerate(node)
            ]
            pots, outs = propagate_quantized(self.qnet, raw_bounds)
            from nnverify.intervals import LayerBounds

            return LayerBounds(
                potentials=quantized_bounds_to_real(self.qnet, pots),
                outputs=quantized_bounds_to_real(self.qnet, outs),
            )
        return propagate_network(self.net, self.node_box(node))

    def explore(self, node, depth: int, use_invariants: bool):
        """Returns (counterexample_or_None, fully_resolved)."""
        self.stats.nodes_explored += 1
        if self.stats.nodes_explored > self.config.budget:
            raise _BudgetExhausted()
        if self.region.base is not None:
            if self.min_dist2(node) > self.gamma2_slack:
                self.stats.nodes_pruned_region += 1
                return None, True
        if self.is_point(node):
            return self.eval_point(node), True
        if use_invariants and self.driver is not None:
            bounds = self.node_bounds(node)
            if self.driver.box_safe(bounds):
                self.stats.nodes_pruned_invariant += 1
                return None, True
        if depth <= 0:
            return None, False
        left, right = self.split_node(node)
        cex, left_done = self.explore(left, depth - 1, use_invariants)
        if cex is not None:
            return cex, True
        cex, right_done = self.explore(right, depth - 1, use_invariants)
        if cex is not None:
            return cex, True
        return None, left_done and right_done


def _make_driver(net, prop, region, fmt, config) -> _Driver:
    if isinstance(prop, AdversarialRobustness):
        return _AdversarialDriver(prop)
    if isinstance(prop, OutputThreshold):
        return _ThresholdDriver(prop, net)
    if isinstance(prop, CoverageGoal):
        base = np.asarray(prop.base, dtype=np.float64)
        if fmt is not None:
            from nnverify.fxpnet import forward_fxp

            base_trace = forward_fxp(net, base, fmt, config.rounding)
        else:
            base_trace = forward_float(net, base)
        return _CoverageGoalDriver(prop, base_trace)
    raise VerifierError(f"unsupported property type {type(prop).__name__}")


def base_case(
    net: Network,
    prop,
    region: Region,
    k: int,
    fmt: Optional[FxpFormat] = None,
    use_invariants: bool = True,
    config: Optional[VerifyConfig] = None,
) -> Optional[Counterexample]:
    """Search for a violation reachable within k bisections."""
    config = config or VerifyConfig()
    grid = build_grid(region, fmt, config.rounding)
    stats = SearchStats(budget=config.budget)
    driver = _make_driver(net, prop, region, fmt, config)
    search = _Search(net, driver, region, grid, fmt, config, stats)
    try:
        cex, _ = search.explore(search.root(), k, use_invariants)
    except _BudgetExhausted:
        return None
    return cex


def forward_condition(
    net: Network,
    region: Region,
    k: int,
    fmt: Optional[FxpFormat] = None,
    config: Optional[VerifyConfig] = None,
) -> bool:
    """True iff the region's grid is fully concretized within depth k.

    This is the structural check: no property bounds are consulted, only
    the bisection tree and the distance pruning of the region itself.
    """
    config = config or VerifyConfig()
    grid = build_grid(region, fmt, config.rounding)
    stats = SearchStats(budget=config.budget)
    search = _Search(net, None, region, grid, fmt, config, stats)

    def walk(node, depth):
        stats.nodes_explored += 1
        if stats.nodes_explored > config.budget:
            raise _BudgetExhausted()
        if search.region.base is not None:
            if search.min_dist2(node) > search.gamma2_slack:
                return True
        if search.is_point(node):
            return True
        if depth <= 0:
            return False
        left, right = search.split_node(node)
        return walk(left, depth - 1) and walk(right, depth - 1)

    try:
        return walk(search.root(), k)
    except _BudgetExhausted:
        return False


def incremental_verify(
    net: Network,
    prop,
    region: Region,
    fmt: Optional[FxpFormat] = None,
    config: Optional[VerifyConfig] = None,
) -> Verdict:
    """Iterative deepening: violation -> UNSAFE, full resolution -> SAFE,
    exhausted budget -> UNKNOWN."""
    config = config or VerifyConfig()
    if config.workers > 1:
        return _parallel_verify(net, prop, region, fmt, config)
    start = time.perf_counter()
    grid = build_grid(region, fmt, config.rounding)
    stats = SearchStats(budget=config.budget)
    driver = _make_driver(net, prop, region, fmt, config)
    search = _Search(net, driver, region, grid, fmt, config, stats)
    max_depth = config.max_depth if config.max_depth is not None else grid.full_depth()
    ks = list(range(0, max_depth + 1, max(1, config.granularity)))
    if not ks or ks[-1] != max_depth:
        ks.append(max_depth)
    status = Status.UNKNOWN
    cex = None
    try:
        for k in ks:
            stats.k_final = k
            cex, resolved = search.explore(search.root(), k, config.use_invariants)
            if cex is not None:
                status = Status.UNSAFE
                break
            if resolved:
                status = Status.SAFE
                break
    except _BudgetExhausted:
        stats.budget_exhausted = True
        status = Status.UNKNOWN
    stats.wall_time_s = time.perf_counter() - start
    return Verdict(status=status, counterexample=cex, stats=stats)


def _subtree_regions(region: Region, grid: _Grid, want: int):
    """Split the root index ranges breadth-first into about `want` parts."""
    nodes = [[(0, c - 1) for c in grid.counts]]
    while len(nodes) < want:
        node = nodes.pop(0)
        counts = [b - a + 1 for a, b in node]
        if all(c == 1 for c in counts):
            nodes.append(node)
            break
        dim = max(range(len(counts)), key=lambda i: (counts[i], -i))
        a, b = node[dim]
        mid = a + (b - a + 1) // 2 - 1
        left, right = list(node), list(node)
        left[dim] = (a, mid)
        right[dim] = (mid + 1, b)
        nodes.extend([left, right])
    return nodes


def _verify_subtree(args):
    net, prop, region, fmt, config, node, dims = args
    sub_box = Box(
        [
            dims[d][a] * (2.0 ** -fmt.frac_bits) if fmt else float(dims[d][a])
            for d, (a, _) in enumerate(node)
        ],
        [
            dims[d][b] * (2.0 ** -fmt.frac_bits) if fmt else float(dims[d][b])
            for d, (_, b) in enumerate(node)
        ],
    )
    sub_region = Region(
        box=sub_box, base=region.base, gamma=region.gamma, grid_step=region.grid_step
    )
    sub_config = VerifyConfig(
        max_depth=config.max_depth,
        budget=config.budget,
        granularity=config.granularity,
        use_invariants=config.use_invariants,
        rounding=config.rounding,
        workers=1,
    )
    return incremental_verify(net, prop, sub_region, fmt, sub_config)


def _parallel_verify(net, prop, region, fmt, config) -> Verdict:
    from concurrent.futures import ProcessPoolExecutor

    start = time.perf_counter()
    grid = build_grid(region, fmt, config.rounding)
    nodes = _subtree_regions(region, grid, config.workers)
    jobs = [(net, prop, region, fmt, config, node, grid.dims) for node in nodes]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        verdicts = list(pool.map(_verify_subtree, jobs))
    stats = SearchStats(budget=config.budget)
    for v in verdicts:
        stats.nodes_explored += v.stats.nodes_explored
        stats.nodes_pruned_invariant += v.stats.nodes_pruned_invariant
        stats.nodes_pruned_region += v.stats.nodes_pruned_region
        stats.leaves_evaluated += v.stats.leaves_evaluated
        stats.k_final = max(stats.k_final, v.stats.k_final)
        stats.budget_exhausted |= v.stats.budget_exhausted
    stats.wall_time_s = time.perf_counter() - start
    for v in verdicts:  # deterministic combine: first unsafe subtree wins
        if v.status is Status.UNSAFE:
            return Verdict(Status.UNSAFE, v.counterexample, stats)
    if any(v.status is Status.UNKNOWN for v in verdicts):
        return Verdict(Status.UNKNOWN, None, stats)
    return Verdict(Status.SAFE, None, stats)


def check_output_property(
    net: Network,
    region: Region,
    prop: OutputThreshold,
    fmt: Optional[FxpFormat] = None,
    config: Optional[VerifyConfig] = None,
) -> Verdict:
    """SAFE iff the neuron respects the bound over the whole region."""
    return incremental_verify(net, prop, region, fmt, config)


def coverage_goal_search(
    net: Network,
    goal: CoverageGoal,
    region: Region,
    fmt: Optional[FxpFormat] = None,
    config: Optional[VerifyConfig] = None,
) -> Verdict:
    """UNSAFE iff some input in the region reaches the coverage goal when
    paired with the base input."""
    return incremental_verify(net, goal, region, fmt, config)


def replay_counterexample(net: Network, cex: Counterexample, prop) -> bool:
    """Re-run the witness from scratch and confirm the stored violation."""
    if cex.fmt is not None:
        from nnverify.fxpnet import forward_fxp

        trace = forward_fxp(net, list(cex.input), cex.fmt, cex.rounding)
        if trace.potentials_raw != cex.fxp_trace["potentials_raw"]:
            return False
        if trace.outputs_raw != cex.fxp_trace["outputs_raw"]:
            return False
    else:
        trace = forward_float(net, list(cex.input))
    if isinstance(prop, AdversarialRobustness):
        return check_adversarial(trace, prop)
    if isinstance(prop, OutputThreshold):
        layer = prop.layer if prop.layer is not None else len(net.layers) - 1
        value = float(trace.outputs[layer][prop.neuron])
        return value > prop.bound if prop.relation == "<=" else value < prop.bound
    if isinstance(prop, CoverageGoal):
        base = np.asarray(prop.base, dtype=np.float64)
        if cex.fmt is not None:
            from nnverify.fxpnet import forward_fxp

            base_trace = forward_fxp(net, base, cex.fmt, cex.rounding)
        else:
            base_trace = forward_float(net, base)
        cfg = CoverConfig(d=prop.d, v=prop.v, p=prop.p)
        report = coverage_report(prop.method, (base_trace, trace), cfg)
        return report.ratio >= prop.p
    raise VerifierError(f"unsupported property type {type(prop).__name__}")
