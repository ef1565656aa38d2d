"""Synthetic generator and surrogate QoR contracts."""

import hashlib
from pathlib import Path

import pytest

from conftest import ff, gate, make_netlist, net
from ctsbench.activity import ActivityMap
from ctsbench.coarsen import CoarsenConfig, build_clustered_graph
from ctsbench.corpus import (
    CorpusSpec,
    SKEW_FLOOR_NS,
    generate_corpus,
    generate_netlist,
    surrogate_qor,
)
from ctsbench.knobs import CtsKnobs, PlacementKnobs, sample_placement_knobs
from ctsbench.netlist import PlacedNetlist, parse_netlist, write_netlist
from ctsbench.rng import SplitMix64

KNOBS = PlacementKnobs("DELAY1", 1.0, 0, 55.0, 0.65, 0, 0)
CTS = CtsKnobs(sink_max_dia=50, max_wire_length=200, cluster_size=20, buffer_distance=100)


def test_minimal_two_cell_design():
    n, a = generate_netlist(KNOBS, 2, seed=1)
    kinds = sorted(c.kind.value for c in n.cells)
    assert kinds == ["ff", "logic"]
    assert len(n.nets) == 1
    assert len(a) == 2


def test_generated_netlists_are_valid_and_round_trip():
    for seed in range(8):
        knobs = sample_placement_knobs(SplitMix64(seed + 900))
        n, a = generate_netlist(knobs, 80 + seed * 37, seed=seed)
        assert parse_netlist(write_netlist(n)) == n
        assert all(a.get(c.id) is not None for c in n.cells)


def test_aspect_ratio_contract():
    for ratio in (0.7, 1.0, 1.4, 2.0):
        knobs = PlacementKnobs("AREA0", ratio, 0, 55.0, 0.65, 0, 0)
        n, _ = generate_netlist(knobs, 100, seed=5)
        assert n.die_height / n.die_width == pytest.approx(ratio, abs=1e-9)


def test_generation_is_deterministic():
    a1 = generate_netlist(KNOBS, 200, seed=9)
    a2 = generate_netlist(KNOBS, 200, seed=9)
    assert write_netlist(a1[0]) == write_netlist(a2[0])
    assert a1[1] == a2[1]
    b = generate_netlist(KNOBS, 200, seed=10)
    assert write_netlist(a1[0]) != write_netlist(b[0])


def test_ff_fraction_controls_composition():
    n, _ = generate_netlist(KNOBS, 200, seed=3, ff_fraction=0.25)
    assert len(n.flip_flops) == 50


# --- surrogate QoR -----------------------------------------------------------

def _qor_for(n, a, cts=CTS, seed=4, cfg_seed=2):
    g = build_clustered_graph(n, a, CoarsenConfig(seed=cfg_seed))
    return surrogate_qor(n, g, cts, seed)


def test_zero_dispersion_hits_skew_floor_and_minimal_buffers():
    n = make_netlist([ff("f0", 5.0, 5.0), gate("g0", 5.0, 5.0)],
                     [net("n0", "f0", "g0")], w=10.0, h=10.0)
    q = _qor_for(n, ActivityMap({"f0": 3, "g0": 4}))
    assert q.skew_setup == SKEW_FLOOR_NS
    assert q.clock_buffers == 1  # ceil(1 / cluster_size) with no flop span term


def test_doubling_toggles_strictly_increases_dynamic_power():
    knobs = sample_placement_knobs(SplitMix64(70))
    n, a = generate_netlist(knobs, 150, seed=6)
    doubled = ActivityMap({k: 2 * v for k, v in a.items()})
    q1 = _qor_for(n, a)
    q2 = _qor_for(n, doubled)
    assert q2.dynamic_power > q1.dynamic_power
    assert q2.total_power > q1.total_power


def _scaled(n: PlacedNetlist, factor: float, about_center: bool) -> PlacedNetlist:
    """Scale coordinates toward the die center (shrink) or scale the whole die."""
    cells = []
    for c in n.cells:
        if about_center:
            x = n.die_width / 2 + (c.x - n.die_width / 2) * factor
            y = n.die_height / 2 + (c.y - n.die_height / 2) * factor
            cells.append(type(c)(c.id, c.kind, x, y, c.master, c.control_net))
        else:
            cells.append(type(c)(c.id, c.kind, c.x * factor, c.y * factor,
                                 c.master, c.control_net))
    w = n.die_width if about_center else n.die_width * factor
    h = n.die_height if about_center else n.die_height * factor
    return PlacedNetlist(n.design_name, w, h, tuple(cells), n.nets)


def test_dispersion_monotone_skew():
    knobs = sample_placement_knobs(SplitMix64(71))
    n, a = generate_netlist(knobs, 150, seed=7)
    shrunk = _scaled(n, 0.5, about_center=True)
    q_wide = _qor_for(n, a)
    q_tight = _qor_for(shrunk, a)
    assert q_tight.skew_setup < q_wide.skew_setup


def test_span_and_buffer_distance_monotone_buffers():
    knobs = sample_placement_knobs(SplitMix64(72))
    n, a = generate_netlist(knobs, 150, seed=8)
    big = _scaled(n, 10.0, about_center=False)
    q_small = _qor_for(n, a)
    q_big = _qor_for(big, a)
    assert q_big.clock_buffers > q_small.clock_buffers

    near = CtsKnobs(50, 200, 20, 70)
    far = CtsKnobs(50, 200, 20, 150)
    q_near = _qor_for(big, a, cts=near)
    q_far = _qor_for(big, a, cts=far)
    assert q_near.clock_buffers >= q_far.clock_buffers


def test_surrogate_is_deterministic():
    knobs = sample_placement_knobs(SplitMix64(73))
    n, a = generate_netlist(knobs, 120, seed=9)
    assert _qor_for(n, a) == _qor_for(n, a)
    assert _qor_for(n, a, seed=5) != _qor_for(n, a, seed=6)


# --- corpus assembly -----------------------------------------------------------

def _tree_digest(root: Path) -> dict[str, str]:
    return {
        p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_corpus_counts_and_layout(tmp_path):
    spec = CorpusSpec(n_designs=2, placements_per_design=3, cts_per_placement=10,
                      cells=(40, 60), seed=77)
    summary = generate_corpus(spec, tmp_path)
    assert len(summary.rows) == 60
    assert spec.total_rows == 60
    assert len(summary.designs) == 2
    assert len(summary.placements) == 6
    for entry in summary.placements:
        assert entry.netlist_path.is_file()
        assert entry.activity_path.is_file()
    assert (tmp_path / "manifest.csv").is_file()


def test_corpus_regeneration_is_byte_identical(tmp_path):
    spec = CorpusSpec(n_designs=1, placements_per_design=2, cts_per_placement=3,
                      cells=(30, 50), seed=13)
    generate_corpus(spec, tmp_path / "one")
    generate_corpus(spec, tmp_path / "two")
    assert _tree_digest(tmp_path / "one") == _tree_digest(tmp_path / "two")


def test_corpus_spec_validation():
    with pytest.raises(ValueError):
        CorpusSpec(n_designs=0)
    with pytest.raises(ValueError):
        CorpusSpec(cells=(1, 5))
    with pytest.raises(ValueError):
        CorpusSpec(ff_fraction=(0.0, 0.5))
