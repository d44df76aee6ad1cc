"""Covering-method regressions against hand-computed potential tables."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nnverify.bench import (
    DEMO_PROBE_INPUTS,
    potential_demo_net,
    recorded_trace_pair,
)
from nnverify.coverage import (
    CoverConfig,
    coverage_report,
    covered_items,
    dc,
    ds_cover,
    dv_cover,
    max_coverage_ratio,
    sc,
    sign,
    ss_cover,
    sv_cover,
    vc,
)
from nnverify.nets import forward_float

CFG = CoverConfig(d=1.0, v=0.05, p=0.8)


@pytest.fixture(scope="module")
def probes():
    net = potential_demo_net()
    return [forward_float(net, x) for x in DEMO_PROBE_INPUTS]


class TestPredicates:
    def test_sign_boundary(self):
        assert sign(0.0) == 1
        assert sign(-1.3) == 0
        assert sign(0.1) == 1

    def test_sc_on_probe_pair(self, probes):
        ex1, ex2 = probes[0], probes[1]
        assert sc((0, 2), ex1, ex2)       # -0.50 -> 0.10
        assert not sc((0, 0), ex1, ex2)   # -1.3 -> -0.3

    def test_sc_identical_traces(self, probes):
        t = probes[0]
        for layer, vals in enumerate(t.potentials):
            for idx in range(len(vals)):
                assert not sc((layer, idx), t, t)

    def test_vc_ratio(self, probes):
        ex2, ex3 = probes[1], probes[2]
        # 0.353 vs 0.176: ratio about 2.006, no sign change
        assert vc(CFG, (2, 0), ex2, ex3)

    def test_vc_false_under_sign_change(self, probes):
        ex1, ex2 = probes[0], probes[1]
        assert sc((0, 2), ex1, ex2)
        assert not vc(CFG, (0, 2), ex1, ex2)

    def test_vc_equal_values_at_unit_threshold(self):
        t1 = [np.array([0.5])]
        t2 = [np.array([0.5])]
        assert vc(CoverConfig(d=1.0, v=0.0, p=0.0), (0, 0), t1, t2)

    def test_vc_both_zero_is_no_change(self):
        t1 = [np.array([0.0])]
        t2 = [np.array([0.0])]
        assert not vc(CoverConfig(d=1.0, v=0.0, p=0.0), (0, 0), t1, t2)

    def test_dc_layer_deltas(self, probes):
        ex2, ex3 = probes[1], probes[2]
        # layer-0 deltas are 0.10, 0.14, 0.06
        assert dc(CoverConfig(v=0.05), 0, ex2, ex3)
        assert not dc(CoverConfig(v=0.1), 0, ex2, ex3)

    def test_dc_identical_traces(self, probes):
        assert not dc(CFG, 0, probes[0], probes[0])

    def test_dc_rejects_sign_change(self, probes):
        ex1, ex2 = probes[0], probes[1]
        assert not dc(CoverConfig(v=1e-9), 0, ex1, ex2)


class TestCoverRegression:
    """Exhaustive enumeration over the probe table, frozen by hand."""

    def test_first_pair_ss_exact(self, probes):
        items = covered_items("ss", CFG, probes[0], probes[1])
        assert set(items) == {((0, 2), (1, 0)), ((0, 2), (1, 1))}
        assert ss_cover(((0, 2), (1, 0)), probes[0], probes[1])

    def test_first_pair_other_methods_empty(self, probes):
        for method in ("sv", "ds", "dv"):
            assert covered_items(method, CFG, probes[0], probes[1]) == []

    def test_second_pair_sv_exact(self, probes):
        items = covered_items("sv", CFG, probes[1], probes[2])
        assert items == [((1, 1), (2, 0))]
        assert sv_cover(((1, 1), (2, 0)), CFG, probes[1], probes[2])

    def test_second_pair_ds_exact(self, probes):
        items = covered_items("ds", CFG, probes[1], probes[2])
        assert items == [(0, (1, 1))]
        assert ds_cover((1, 1), 0, CFG, probes[1], probes[2])

    def test_second_pair_dv_exact(self, probes):
        assert covered_items("dv", CFG, probes[1], probes[2]) == [(0, (1, 0))]

    def test_second_pair_ss_empty(self, probes):
        assert covered_items("ss", CFG, probes[1], probes[2]) == []

    def test_fourth_pair_dv_widespread(self, probes):
        items = covered_items("dv", CFG, probes[0], probes[3])
        assert set(items) == {(0, (1, 0)), (0, (1, 1)), (1, (2, 0))}
        assert dv_cover((1, 0), 0, CFG, probes[0], probes[3])

    def test_fourth_pair_signs_stable(self, probes):
        for method in ("ss", "sv", "ds"):
            assert covered_items(method, CFG, probes[0], probes[3]) == []


class TestRecordedPair:
    def test_ss_pairs_exact(self):
        clean, noisy = recorded_trace_pair()
        items = covered_items("ss", CFG, clean, noisy)
        assert set(items) == {((0, 0), (1, 3)), ((1, 3), (2, 4))}

    def test_ss_report_ratio(self):
        clean, noisy = recorded_trace_pair()
        report = coverage_report("ss", (clean, noisy), CoverConfig(p=0.8))
        assert report.total_neurons == 14
        assert sorted(report.covered_neurons) == [(0, 0), (1, 3), (2, 4)]
        assert abs(report.ratio - 3 / 14) < 1e-12
        assert not report.literal

    def test_goal_zero_always_met(self):
        clean, noisy = recorded_trace_pair()
        report = coverage_report("ss", (clean, noisy), CoverConfig(p=0.0))
        assert report.literal


class TestReport:
    def test_counting_bound(self, probes):
        for method in ("ss", "sv", "ds", "dv"):
            r = coverage_report(method, (probes[0], probes[3]), CFG)
            assert len(r.covered_neurons) <= r.total_neurons
            assert 0.0 <= r.ratio <= 1.0

    def test_union_over_pairs_is_monotone(self, probes):
        small = coverage_report("ss", (probes[0], probes[1]), CFG)
        pairs = [(probes[0], probes[1]), (probes[0], probes[2])]
        big = coverage_report("ss", pairs, CFG)
        assert set(small.covered_neurons) <= set(big.covered_neurons)
        assert big.ratio >= small.ratio

    def test_rejects_empty_input(self):
        with pytest.raises(ValueError):
            coverage_report("ss", [], CFG)

    def test_json_shape(self, probes):
        r = coverage_report("ds", (probes[1], probes[2]), CFG)
        blob = r.to_json()
        assert blob["method"] == "ds"
        assert blob["covered_pairs"] == [{"layer": 0, "downstream": [1, 1]}]


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

trace_shapes = st.lists(st.integers(1, 4), min_size=2, max_size=3)


@st.composite
def trace_pairs(draw):
    shape = draw(trace_shapes)
    mk = lambda: [
        np.array(
            draw(
                st.lists(
                    st.floats(-5, 5, allow_nan=False, width=32),
                    min_size=n,
                    max_size=n,
                )
            )
        )
        for n in shape
    ]
    return mk(), mk()


@given(trace_pairs(), st.sampled_from(["ss", "ds", "sv", "dv"]))
def test_symmetry_under_trace_swap(pair, method):
    t1, t2 = pair
    cfg = CoverConfig(d=1.5, v=0.1, p=0.5)
    assert covered_items(method, cfg, t1, t2) == covered_items(method, cfg, t2, t1)


@given(trace_pairs())
def test_sc_vc_mutually_exclusive(pair):
    t1, t2 = pair
    cfg = CoverConfig(d=1.0, v=0.0, p=0.0)
    for layer, vals in enumerate(t1):
        for idx in range(len(vals)):
            assert not (sc((layer, idx), t1, t2) and vc(cfg, (layer, idx), t1, t2))


def test_possibility_bound_dominates_concrete(probes):
    # degenerate bounds around a concrete trace give at least its coverage
    from nnverify.intervals import Box

    base = probes[0]
    for other in probes[1:]:
        bounds = [Box.from_point(p) for p in other.potentials]
        for method in ("ss", "sv", "ds", "dv"):
            concrete = coverage_report(method, (base, other), CFG).ratio
            optimistic = max_coverage_ratio(method, CFG, base, bounds)
            assert optimistic >= concrete - 1e-12
