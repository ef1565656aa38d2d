"""Raw graph construction: node-set rule, metric properties, determinism."""

import pytest

from conftest import ff, gate, make_netlist, net
from ctsbench.activity import ActivityMap
from ctsbench.corpus import generate_netlist
from ctsbench.knobs import sample_placement_knobs
from ctsbench.rawgraph import build_raw_graph, manhattan
from ctsbench.rng import SplitMix64

EMPTY = ActivityMap({})


def test_manhattan_hand_value():
    assert manhattan((0.2, 0.3), (0.5, 0.1)) == pytest.approx(0.5, abs=1e-12)


def test_manhattan_identity():
    assert manhattan((0.4, 0.9), (0.4, 0.9)) == 0.0


def test_manhattan_metric_properties():
    rng = SplitMix64(17)
    for _ in range(500):
        a = (rng.uniform(), rng.uniform())
        b = (rng.uniform(), rng.uniform())
        c = (rng.uniform(), rng.uniform())
        assert manhattan(a, b) >= 0.0
        assert manhattan(a, b) == manhattan(b, a)
        assert manhattan(a, b) <= manhattan(a, c) + manhattan(c, b) + 1e-12
        assert manhattan(a, a) == 0.0


def test_one_hop_rule():
    n = make_netlist(
        [ff("f0", 0.1, 0.1), gate("g0", 0.2, 0.1), gate("g1", 0.3, 0.1)],
        [net("n0", "f0", "g0"), net("n1", "g0", "g1")],
    )
    g = build_raw_graph(n, EMPTY)
    assert {node.cell_id for node in g.nodes} == {"f0", "g0"}
    assert len(g.edges) == 1
    src, dst = g.edges[0].src, g.edges[0].dst
    assert {g.nodes[src].cell_id, g.nodes[dst].cell_id} == {"f0", "g0"}


def test_raw_hops_override_includes_deeper_logic():
    n = make_netlist(
        [ff("f0", 0.1, 0.1), gate("g0", 0.2, 0.1), gate("g1", 0.3, 0.1)],
        [net("n0", "f0", "g0"), net("n1", "g0", "g1")],
    )
    g = build_raw_graph(n, EMPTY, hops=2)
    assert {node.cell_id for node in g.nodes} == {"f0", "g0", "g1"}
    assert len(g.edges) == 2


def test_isolated_ff():
    g = build_raw_graph(make_netlist([ff("f0", 0.5, 0.5)]), EMPTY)
    assert len(g.nodes) == 1
    assert len(g.edges) == 0


def test_corner_to_corner_weight():
    n = make_netlist(
        [ff("f0", 0.0, 0.0), ff("f1", 100.0, 80.0)],
        [net("n0", "f0", "f1")],
        w=100.0, h=80.0,
    )
    g = build_raw_graph(n, EMPTY)
    assert len(g.edges) == 1
    assert g.edges[0].weight == pytest.approx(2.0, abs=1e-12)


def test_node_set_soundness_on_generated_designs():
    for seed in range(5):
        knobs = sample_placement_knobs(SplitMix64(seed + 100))
        n, a = generate_netlist(knobs, 150, seed=seed)
        g = build_raw_graph(n, a)
        index = n.cell_index
        ff_ids = {c.id for c in n.flip_flops}
        assert ff_ids <= set(g.node_index)
        one_hop = set()
        for netx in n.nets:
            if netx.driver in ff_ids:
                one_hop.update(s for s in netx.sinks if not index[s].is_ff)
        assert set(g.node_index) == ff_ids | one_hop


def test_feature_bounds_and_order():
    knobs = sample_placement_knobs(SplitMix64(31))
    n, a = generate_netlist(knobs, 120, seed=9)
    g = build_raw_graph(n, a)
    ids = [node.cell_id for node in g.nodes]
    assert ids == sorted(ids)
    for node in g.nodes:
        ux, uy, is_ff, act = node.features
        assert 0.0 <= ux <= 1.0 and 0.0 <= uy <= 1.0
        assert is_ff in (0.0, 1.0)
        assert act >= 0.0


def test_build_is_deterministic():
    knobs = sample_placement_knobs(SplitMix64(32))
    n, a = generate_netlist(knobs, 120, seed=10)
    assert build_raw_graph(n, a) == build_raw_graph(n, a)


def test_edges_unique_per_pair():
    # two nets joining the same cells collapse to one undirected edge
    n = make_netlist(
        [ff("f0", 0.1, 0.1), gate("g0", 0.2, 0.1)],
        [net("n0", "f0", "g0"), net("n1", "f0", "g0")],
    )
    g = build_raw_graph(n, EMPTY)
    assert len(g.edges) == 1
