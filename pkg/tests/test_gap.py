"""Gap vector and Pareto distance identities, ranking properties."""

import math

import pytest

from ctsbench.gap import (
    DesignGroup,
    GapVector,
    NonPositiveMinError,
    QorRecord,
    gap_vector,
    pareto_distance,
    score_group,
)
from ctsbench.rng import SplitMix64


def qor(skew=1.0, power=1.0, wl=1000.0, hold=0.5):
    return QorRecord(
        skew_setup=skew, skew_hold=hold,
        worst_slack_setup=0.5, worst_slack_hold=0.1,
        tns_setup=0.0, tns_hold=0.0,
        total_power=power, dynamic_power=power * 0.8, static_power=power * 0.2,
        wirelength=wl, cell_utilization=50.0,
        clock_buffers=3, clock_inverters=1, routing_buffers=2, repair_buffers=0,
    )


def test_gap_vector_hand_arithmetic():
    # group minima (skew 100, power 1.0, WL 4000); run (100, 2.0, 5000)
    group = DesignGroup("d", (
        ("a", qor(skew=100.0, power=2.0, wl=5000.0)),
        ("b", qor(skew=150.0, power=1.0, wl=4000.0)),
    ))
    g = gap_vector(group.runs[0][1], group)
    assert g.g_skew == pytest.approx(1.0, abs=1e-12)
    assert g.g_power == pytest.approx(2.0, abs=1e-12)
    assert g.g_wl == pytest.approx(1.25, abs=1e-12)


def test_minimum_achiever_gets_unit_vector():
    group = DesignGroup("d", (
        ("best", qor(skew=1.0, power=1.0, wl=1000.0)),
        ("worse", qor(skew=2.0, power=3.0, wl=2000.0)),
    ))
    g = gap_vector(group.runs[0][1], group)
    assert (g.g_skew, g.g_power, g.g_wl) == (1.0, 1.0, 1.0)
    assert pareto_distance(g) == 0.0


def test_zero_power_minimum_raises():
    group = DesignGroup("d", (("a", qor(power=0.0)), ("b", qor(power=1.0))))
    with pytest.raises(NonPositiveMinError) as exc:
        gap_vector(group.runs[0][1], group)
    assert exc.value.metric == "total_power"


def test_pareto_distance_values():
    assert pareto_distance(GapVector(1, 1, 1)) == 0.0
    assert pareto_distance(GapVector(2, 1, 1)) == pytest.approx(1.0, abs=1e-12)
    assert pareto_distance(GapVector(1.3, 1.4, 1.0)) == pytest.approx(0.5, abs=1e-12)


def test_anchor_property():
    assert pareto_distance(GapVector(1, 1, 1)) < 1e-12
    rng = SplitMix64(8)
    for _ in range(200):
        g = GapVector(1 + rng.uniform() * 3, 1 + rng.uniform() * 3, 1 + rng.uniform() * 3)
        if (g.g_skew, g.g_power, g.g_wl) != (1.0, 1.0, 1.0):
            assert pareto_distance(g) > 0.0


def test_score_group_two_run_oracle():
    # A=(100, 2.0, 5000), B=(150, 1.0, 4000) -> distances 1.0308 / 0.5
    group = DesignGroup("d", (
        ("A", qor(skew=100.0, power=2.0, wl=5000.0)),
        ("B", qor(skew=150.0, power=1.0, wl=4000.0)),
    ))
    scored = score_group(group)
    assert [s.run_id for s in scored] == ["B", "A"]
    assert scored[0].distance == pytest.approx(0.5, abs=1e-9)
    assert scored[1].distance == pytest.approx(math.sqrt(1.0 + 0.0625), abs=1e-9)
    assert scored[1].distance == pytest.approx(1.0307764064044151, abs=1e-9)


def test_single_run_group_self_normalizes():
    group = DesignGroup("d", (("only", qor(skew=3.0, power=2.0, wl=9999.0)),))
    (s,) = score_group(group)
    assert (s.gap.g_skew, s.gap.g_power, s.gap.g_wl) == (1.0, 1.0, 1.0)
    assert s.distance == 0.0


def test_scale_invariance():
    rng = SplitMix64(99)
    runs = tuple(
        (f"r{i}", qor(skew=0.1 + rng.uniform(), power=0.5 + rng.uniform(),
                      wl=100 + 1000 * rng.uniform()))
        for i in range(6)
    )
    base = score_group(DesignGroup("d", runs))
    scaled_runs = tuple(
        (rid, qor(skew=q.skew_setup * 10, power=q.total_power * 3, wl=q.wirelength * 7))
        for rid, q in runs
    )
    scaled = score_group(DesignGroup("d", scaled_runs))
    assert [s.run_id for s in base] == [s.run_id for s in scaled]
    for s1, s2 in zip(base, scaled):
        assert s1.distance == pytest.approx(s2.distance, rel=1e-12)


def test_per_metric_witnesses_and_lower_bound():
    rng = SplitMix64(123)
    runs = tuple(
        (f"r{i}", qor(skew=0.1 + rng.uniform(), power=0.5 + rng.uniform(),
                      wl=100 + 1000 * rng.uniform()))
        for i in range(10)
    )
    scored = score_group(DesignGroup("d", runs))
    assert any(abs(s.gap.g_skew - 1.0) < 1e-12 for s in scored)
    assert any(abs(s.gap.g_power - 1.0) < 1e-12 for s in scored)
    assert any(abs(s.gap.g_wl - 1.0) < 1e-12 for s in scored)
    for s in scored:
        assert s.gap.g_skew >= 1.0 - 1e-12
        assert s.gap.g_power >= 1.0 - 1e-12
        assert s.gap.g_wl >= 1.0 - 1e-12


def test_tie_break_by_run_id():
    group = DesignGroup("d", (("z", qor()), ("a", qor())))
    scored = score_group(group)
    assert [s.run_id for s in scored] == ["a", "z"]


def test_hold_skew_flag():
    group = DesignGroup("d", (
        ("a", qor(skew=1.0, hold=0.2)),
        ("b", qor(skew=1.0, hold=0.4)),
    ))
    g = gap_vector(group.runs[1][1], group, skew_metric="hold")
    assert g.g_skew == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        gap_vector(group.runs[0][1], group, skew_metric="bogus")


def test_qor_record_validation():
    with pytest.raises(ValueError):
        qor(power=-1.0)
    with pytest.raises(ValueError):
        QorRecord(1, 1, 0, 0, 0, 0, 1, 1, 0, 1, 150.0, 1, 1, 1, 1)  # utilization > 100
    with pytest.raises(ValueError):
        QorRecord(1, 1, 0, 0, 0, 0, 1, 1, 0, 1, 50.0, -1, 1, 1, 1)  # negative count
