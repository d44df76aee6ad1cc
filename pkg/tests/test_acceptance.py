"""Acceptance suite: one test per criterion, pass/fail line printed each.

Run with `pytest tests/test_acceptance.py -v -s` to see the criterion
lines.  Every tolerance is pinned here; nothing defers to calibration.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction

import jsonschema
import numpy as np
import pytest

from nnverify import fxp
from nnverify.bench import (
    DEMO_PROBE_INPUTS,
    DEMO_PROBE_POTENTIALS,
    generate_dataset,
    glyph_vector,
    load_vocalic_network,
    potential_demo_net,
    recorded_trace_pair,
    toy_relu_net,
)
from nnverify.coverage import CoverConfig, coverage_report, covered_items
from nnverify.fxp import FxpFormat, Rounding, from_real, to_fraction
from nnverify.fxpnet import QuantizedNetwork, conformance_diff, forward_fxp
from nnverify.intervals import Box, propagate_network
from nnverify.nets import forward_float
from nnverify.verifier import (
    AdversarialRobustness,
    CoverageGoal,
    OutputThreshold,
    Region,
    Status,
    VerifyConfig,
    check_adversarial,
    euclidean_distance,
    incremental_verify,
    replay_counterexample,
)


def _report(criterion: str, detail: str):
    print(f"\n[PASS] {criterion}: {detail}")


# ---------------------------------------------------------------------------
# C1: float SAFE vs narrow fixed-point UNSAFE on the 2-2-1 example
# ---------------------------------------------------------------------------


def test_c01_verdict_flip_between_float_and_narrow_format():
    start = time.perf_counter()
    net = toy_relu_net()
    point = [0.749, 0.498]
    prop = OutputThreshold(neuron=0, bound=2.7, relation=">=")
    region = Region.point(point)

    f_float = forward_float(net, point).final_outputs[0]
    assert abs(f_float - 2.745) <= 1e-9
    float_verdict = incremental_verify(net, prop, region, fmt=None)
    assert float_verdict.status is Status.SAFE

    fxp_verdict = incremental_verify(net, prop, region, fmt=FxpFormat(4, 6))
    assert fxp_verdict.status is Status.UNSAFE
    f_fxp = fxp_verdict.counterexample.fxp_trace["outputs"][-1][0]
    assert f_fxp < 2.7
    assert abs(f_fxp - 2.6867) <= 0.06

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(
        "C1 verdict flip",
        f"float f={f_float:.6f} SAFE, <4,6> f={f_fxp} UNSAFE ({elapsed:.3f}s)",
    )


# ---------------------------------------------------------------------------
# C2: all 24 recorded potentials reproduced within 1e-6
# ---------------------------------------------------------------------------


def test_c02_probe_potential_regression():
    net = potential_demo_net()
    worst = 0.0
    for x, expected in zip(DEMO_PROBE_INPUTS, DEMO_PROBE_POTENTIALS):
        got = np.concatenate(forward_float(net, x).potentials)
        worst = max(worst, float(np.max(np.abs(got - np.array(expected)))))
    assert worst < 1e-6
    _report("C2 potential table", f"24 potentials, max error {worst:.2e}")


# ---------------------------------------------------------------------------
# C3: covering-method regression on the probe table and the recorded pair
# ---------------------------------------------------------------------------


def test_c03_covering_method_regression():
    start = time.perf_counter()
    cfg = CoverConfig(d=1.0, v=0.05, p=0.8)
    net = potential_demo_net()
    probes = [forward_float(net, x) for x in DEMO_PROBE_INPUTS]

    ss01 = covered_items("ss", cfg, probes[0], probes[1])
    assert ((0, 2), (1, 0)) in ss01

    ds12 = covered_items("ds", cfg, probes[1], probes[2])
    assert ds12 == [(0, (1, 1))]
    sv12 = covered_items("sv", cfg, probes[1], probes[2])
    assert sv12 == [((1, 1), (2, 0))]

    clean, noisy = recorded_trace_pair()
    ss_items = covered_items("ss", cfg, clean, noisy)
    assert set(ss_items) == {((0, 0), (1, 3)), ((1, 3), (2, 4))}
    rep = coverage_report("ss", (clean, noisy), cfg)
    assert rep.total_neurons == 14
    assert abs(rep.ratio - 3 / 14) < 1e-12
    assert abs(rep.ratio - 0.21) < 0.005
    assert rep.literal is False

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(
        "C3 covering methods",
        f"pairs reproduced, recorded ratio {rep.ratio:.2%} < 80% ({elapsed:.3f}s)",
    )


# ---------------------------------------------------------------------------
# C4: coverage-goal search verdict pattern on the 2-2-1 example
# ---------------------------------------------------------------------------


def test_c04_coverage_goal_pattern():
    start = time.perf_counter()
    net = toy_relu_net()
    base = (2.0, 2.0)
    region = Region(box=Box([0.0, 0.0], [4.0, 4.0]), grid_step=0.0625)
    fmt = FxpFormat(16, 16)
    verdicts = {}
    witness = None
    for method in ("ss", "ds", "sv", "dv"):
        goal = CoverageGoal(method=method, p=0.5, base=base)
        verdict = incremental_verify(net, goal, region, fmt=fmt)
        verdicts[method] = verdict.status
        if method == "sv":
            witness = verdict
    assert verdicts["ss"] is Status.SAFE
    assert verdicts["ds"] is Status.SAFE
    assert verdicts["dv"] is Status.SAFE
    assert verdicts["sv"] is Status.UNSAFE

    goal = CoverageGoal(method="sv", p=0.5, base=base)
    assert replay_counterexample(net, witness.counterexample, goal)

    # the published witness itself must evaluate as covered
    base_trace = forward_fxp(net, base, fmt)
    other = forward_fxp(net, (4.0, 1.3125), fmt)
    rep = coverage_report("sv", (base_trace, other), CoverConfig(d=1.0, v=0.1, p=0.5))
    assert rep.ratio >= 0.5

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(
        "C4 coverage goals",
        f"ss/ds/dv SAFE, sv UNSAFE with witness {witness.counterexample.input} "
        f"({elapsed:.1f}s)",
    )


# ---------------------------------------------------------------------------
# C5: euclidean distance against the brute-force oracle
# ---------------------------------------------------------------------------


def test_c05_euclidean_distance():
    d = euclidean_distance(glyph_vector("A"), glyph_vector("O"))
    assert abs(d - 2.449) <= 0.001

    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        p = rng.uniform(-10, 10, n)
        q = rng.uniform(-10, 10, n)
        slow = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))
        fast = euclidean_distance(p, q)
        assert abs(fast - slow) <= 1e-12 * max(1.0, abs(slow))
    _report("C5 distance", f"A/O distance {d:.4f}, 1000 oracle cases within 1e-12")


# ---------------------------------------------------------------------------
# C6: interval soundness on the trained classifier
# ---------------------------------------------------------------------------


def _batched_forward(net, X):
    """Vectorized float oracle used only by this test."""
    table = net.sigmoid_table
    pots, outs = [], []
    cur = X
    for layer in net.layers:
        u = cur @ layer.weights + layer.biases
        idx = np.floor(u * table.inv_step).astype(np.int64) + table.half
        y = np.where(
            idx < 0,
            0.0,
            np.where(
                idx >= len(table.entries),
                1.0,
                table.entries[np.clip(idx, 0, len(table.entries) - 1)],
            ),
        )
        pots.append(u)
        outs.append(y)
        cur = y
    return pots, outs


def test_c06_interval_soundness_on_classifier():
    start = time.perf_counter()
    net = load_vocalic_network()
    rng = np.random.default_rng(6)

    # the batched oracle must agree with the scalar forward pass
    for _ in range(20):
        x = rng.uniform(0, 1, 25)
        pots, outs = _batched_forward(net, x[None, :])
        trace = forward_float(net, x)
        for a, b in zip(pots, trace.potentials):
            assert np.allclose(a[0], b, atol=1e-12)
        for a, b in zip(outs, trace.outputs):
            assert np.allclose(a[0], b, atol=1e-12)

    violations = 0
    for _ in range(100):
        center = rng.uniform(0, 1, 25)
        radius = rng.uniform(0.0, 0.5, 25)
        box = Box(np.clip(center - radius, 0, 1), np.clip(center + radius, 0, 1))
        bounds = propagate_network(net, box)
        X = rng.uniform(box.los, box.his, size=(10_000, 25))
        pots, outs = _batched_forward(net, X)
        for layer_bounds, values in zip(bounds.potentials, pots):
            violations += int(
                np.sum((values < layer_bounds.los) | (values > layer_bounds.his))
            )
        for layer_bounds, values in zip(bounds.outputs, outs):
            violations += int(
                np.sum((values < layer_bounds.los) | (values > layer_bounds.his))
            )
    assert violations == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(
        "C6 interval soundness",
        f"100 boxes x 10^4 samples, {violations} violations ({elapsed:.1f}s)",
    )


# ---------------------------------------------------------------------------
# C7 + C8: oracle equivalence and invariant pruning on random networks
# ---------------------------------------------------------------------------


def _random_small_net(rng):
    from nnverify.nets import ActivationKind, Layer, Network

    depth = int(rng.integers(1, 4))  # 1..3 layers
    sizes = [2] + [int(rng.integers(1, 5)) for _ in range(depth)]
    layers = []
    for i in range(depth):
        w = np.round(rng.uniform(-2, 2, size=(sizes[i], sizes[i + 1])), 3)
        b = np.round(rng.uniform(-1, 1, size=sizes[i + 1]), 3)
        kind = ActivationKind.RELU if i < depth - 1 else ActivationKind.IDENTITY
        layers.append(Layer(w, b, kind))
    return Network(layers)


@pytest.fixture(scope="module")
def random_net_suite():
    rng = np.random.default_rng(78)
    step = 0.25
    grid_1d = [i * step for i in range(16)]  # 16x16 grid in [0, 3.75]^2
    points = list(itertools.product(grid_1d, grid_1d))
    region = Region(box=Box([0.0, 0.0], [3.75, 3.75]), grid_step=step)
    results = []
    start = time.perf_counter()
    for trial in range(200):
        net = _random_small_net(rng)
        fmt = FxpFormat(4, 4) if trial % 2 == 0 else FxpFormat(8, 8)
        qnet = QuantizedNetwork.build(net, fmt, Rounding.FLOOR)
        outs = np.array(
            [forward_fxp(net, p, fmt, qnet=qnet).final_outputs[0] for p in points]
        )
        if trial % 2 == 0:
            bound = float(np.max(outs) + 0.5 + 0.05 * abs(np.max(outs)))
        else:
            bound = float(np.quantile(outs, 0.9))
        prop = OutputThreshold(neuron=0, bound=bound, relation="<=")
        expected_unsafe = bool(np.any(outs > bound))
        with_inv = incremental_verify(
            net, prop, region, fmt=fmt, config=VerifyConfig(use_invariants=True)
        )
        without_inv = incremental_verify(
            net, prop, region, fmt=fmt, config=VerifyConfig(use_invariants=False)
        )
        results.append(
            {
                "net": net,
                "prop": prop,
                "expected_unsafe": expected_unsafe,
                "with": with_inv,
                "without": without_inv,
            }
        )
    elapsed = time.perf_counter() - start
    return results, elapsed


def test_c07_oracle_equivalence(random_net_suite):
    results, elapsed = random_net_suite
    assert len(results) == 200
    for r in results:
        got_unsafe = r["with"].status is Status.UNSAFE
        assert r["with"].status is not Status.UNKNOWN
        assert got_unsafe == r["expected_unsafe"]
        if got_unsafe:
            assert replay_counterexample(r["net"], r["with"].counterexample, r["prop"])
    assert elapsed < 300.0
    unsafe = sum(r["expected_unsafe"] for r in results)
    _report(
        "C7 oracle equivalence",
        f"200 nets, {unsafe} UNSAFE / {200 - unsafe} SAFE, all witnesses replay "
        f"({elapsed:.1f}s)",
    )


def test_c08_invariant_pruning(random_net_suite):
    results, _ = random_net_suite
    total_with = total_without = 0
    for r in results:
        assert r["with"].status == r["without"].status
        assert r["with"].stats.nodes_explored <= r["without"].stats.nodes_explored
        total_with += r["with"].stats.nodes_explored
        total_without += r["without"].stats.nodes_explored
    assert total_without >= 2 * total_with
    _report(
        "C8 invariant pruning",
        f"nodes {total_with} with vs {total_without} without "
        f"({total_without / total_with:.1f}x reduction)",
    )


# ---------------------------------------------------------------------------
# C9: format sweep conformance on the trained classifier
# ---------------------------------------------------------------------------


def test_c09_format_sweep(tmp_path):
    start = time.perf_counter()
    net = load_vocalic_network()
    data = generate_dataset(seed=0)
    inputs = [im.pixels for im in data]
    formats = ["<2,2>", "<4,4>", "<8,8>", "<16,16>", "<32,32>"]
    reports = [
        conformance_diff(net, inputs, FxpFormat.parse(f), threshold=0.5)
        for f in formats
    ]
    blob = {"network": "vocalic", "threshold": 0.5, "reports": reports}
    out = tmp_path / "sweep.json"
    out.write_text(json.dumps(blob))
    import importlib.resources

    schema = json.loads(
        (
            importlib.resources.files("nnverify.data.schemas")
            / "conformance.schema.json"
        ).read_text()
    )
    jsonschema.validate(json.loads(out.read_text()), schema)

    wide = reports[-1]["summary"]
    assert wide["max_abs_dev"] <= 1e-6
    assert wide["classification_flips"] == 0
    narrow_flips = [r["summary"]["classification_flips"] for r in reports[:-1]]
    assert max(narrow_flips) >= 1

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(
        "C9 format sweep",
        f"wide dev {wide['max_abs_dev']:.1e}, narrow flips {narrow_flips} "
        f"({elapsed:.1f}s)",
    )


# ---------------------------------------------------------------------------
# C10: adversarial search on the trained classifier
# ---------------------------------------------------------------------------


def test_c10_adversarial_search():
    start = time.perf_counter()
    net = load_vocalic_network()
    base = glyph_vector("A")
    prop = AdversarialRobustness(
        base=tuple(base), gamma=1.5, expected_class=0, threshold=0.5
    )
    region = Region(
        box=Box([0.0] * 25, [1.0] * 25), base=base, gamma=1.5, grid_step=1.0
    )
    verdict = incremental_verify(net, prop, region, fmt=FxpFormat(32, 32))
    assert verdict.status is Status.UNSAFE
    cex = verdict.counterexample
    assert replay_counterexample(net, cex, prop)
    # the float oracle must confirm the misclassification independently
    float_trace = forward_float(net, list(cex.input))
    assert check_adversarial(float_trace, prop)
    assert cex.delta_to_base <= 1.5

    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    _report(
        "C10 adversarial search",
        f"UNSAFE at delta {cex.delta_to_base:.3f}, float oracle confirms "
        f"({elapsed:.1f}s, {verdict.stats.nodes_explored} nodes)",
    )


# ---------------------------------------------------------------------------
# C11: randomized fixed-point operator suite against the rational oracle
# ---------------------------------------------------------------------------


def _oracle_quantize(x: Fraction, fmt: FxpFormat, rounding: Rounding) -> Fraction:
    scaled = x * 2**fmt.frac_bits
    if rounding is Rounding.FLOOR:
        raw = math.floor(scaled)
    else:
        raw = round(scaled)  # Fraction rounds half to even
    raw = max(fmt.raw_min, min(fmt.raw_max, raw))
    return Fraction(raw, 2**fmt.frac_bits)


def test_c11_fixed_point_property_suite():
    start = time.perf_counter()
    rng = random.Random(11)
    formats = [FxpFormat(2, 2), FxpFormat(4, 6), FxpFormat(8, 8), FxpFormat(16, 16)]
    n = 100_000

    def rand_pair():
        fmt = formats[rng.randrange(len(formats))]
        a = fxp.FxpValue(rng.randint(fmt.raw_min, fmt.raw_max), fmt)
        b = fxp.FxpValue(rng.randint(fmt.raw_min, fmt.raw_max), fmt)
        return fmt, a, b

    for _ in range(n):  # conversion: round-trip error bound
        fmt = formats[rng.randrange(len(formats))]
        x = Fraction(rng.randint(-(2**20), 2**20), rng.randint(1, 2**10))
        got = to_fraction(from_real(x, fmt))
        assert got == _oracle_quantize(x, fmt, Rounding.NEAREST_EVEN)
        if Fraction(fmt.raw_min, 2**fmt.frac_bits) <= x <= Fraction(
            fmt.raw_max, 2**fmt.frac_bits
        ):
            assert abs(got - x) <= Fraction(1, 2 ** (fmt.frac_bits + 1))

    for _ in range(n):  # addition / subtraction: exact clamped sums
        fmt, a, b = rand_pair()
        lo = Fraction(fmt.raw_min, 2**fmt.frac_bits)
        hi = Fraction(fmt.raw_max, 2**fmt.frac_bits)
        exact = to_fraction(a) + to_fraction(b)
        assert to_fraction(fxp.fxp_add(a, b)) == max(lo, min(hi, exact))
        exact = to_fraction(a) - to_fraction(b)
        assert to_fraction(fxp.fxp_sub(a, b)) == max(lo, min(hi, exact))

    for rounding in (Rounding.NEAREST_EVEN, Rounding.FLOOR):
        for _ in range(n // 2):  # multiplication
            fmt, a, b = rand_pair()
            got = to_fraction(fxp.fxp_mul(a, b, rounding))
            want = _oracle_quantize(to_fraction(a) * to_fraction(b), fmt, rounding)
            assert got == want

        for _ in range(n // 2):  # division
            fmt, a, b = rand_pair()
            if b.raw == 0:
                continue
            got = to_fraction(fxp.fxp_div(a, b, rounding))
            want = _oracle_quantize(to_fraction(a) / to_fraction(b), fmt, rounding)
            assert got == want

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _report(
        "C11 operator suite",
        f"{5 * n} randomized cases against the rational oracle ({elapsed:.1f}s)",
    )
