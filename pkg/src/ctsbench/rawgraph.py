"""Fine-grained graph construction from a placed netlist.

Nodes are flip-flops plus the combinational logic within ``hops`` driver-to-sink
steps of a flip-flop (default one hop: the immediate fan-out). Edges are the
net-expanded driver-sink pairs with both endpoints in the node set, stored once
per unordered pair and weighted by Manhattan distance over die-normalized
coordinates, so weights are comparable across die sizes.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .activity import ActivityMap
from .errors import CtsBenchError
from .netlist import PlacedNetlist, normalize_coords

log = logging.getLogger(__name__)


class EmptyGraphError(CtsBenchError):
    """The construction produced no nodes."""


def manhattan(a: tuple[float, float], b: tuple[float, float]) -> float:
    """|ax - bx| + |ay - by|."""
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class RawNode:
    cell_id: str
    features: tuple[float, float, float, float]  # unit-x, unit-y, is_ff, log_activity


@dataclass(frozen=True)
class RawEdge:
    src: int
    dst: int
    weight: float


@dataclass(frozen=True)
class RawGraph:
    design_name: str
    nodes: tuple[RawNode, ...]
    edges: tuple[RawEdge, ...]
    node_index: Mapping[str, int]
    hops: int = 1

    def feature_matrix(self) -> np.ndarray:
        return np.array([n.features for n in self.nodes], dtype="<f4").reshape(len(self.nodes), 4)

    def edge_index_array(self) -> np.ndarray:
        return np.array(
            [[e.src for e in self.edges], [e.dst for e in self.edges]], dtype="<i8"
        ).reshape(2, len(self.edges))

    def edge_weight_array(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges], dtype="<f4")


def fanout_node_set(n: PlacedNetlist, hops: int = 1) -> set[str]:
    """Flip-flops plus logic reachable within ``hops`` driver-to-sink steps of a
    flip-flop, never expanding through another flip-flop."""
    index = n.cell_index
    nodes = {ff.id for ff in n.flip_flops}
    queue: deque[tuple[str, int]] = deque((ff.id, 0) for ff in n.flip_flops)
    seen = set(nodes)
    while queue:
        cell_id, depth = queue.popleft()
        if depth >= hops:
            continue
        for net in n.nets_by_driver.get(cell_id, ()):
            for sink in net.sinks:
                if index[sink].is_ff or sink in seen:
                    continue
                seen.add(sink)
                nodes.add(sink)
                queue.append((sink, depth + 1))
    return nodes


def build_raw_graph(n: PlacedNetlist, a: ActivityMap, hops: int = 1) -> RawGraph:
    """Construct the raw graph; deterministic (nodes in sorted cell-id order)."""
    if hops < 1:
        raise ValueError("hops must be >= 1")
    node_ids = fanout_node_set(n, hops)
    if not node_ids:
        raise EmptyGraphError("raw graph has no nodes")

    norm = normalize_coords(n)
    ordered = sorted(node_ids)
    node_index = {cell_id: i for i, cell_id in enumerate(ordered)}

    missing = 0
    nodes = []
    for cell_id in ordered:
        cell = n.cell(cell_id)
        ux, uy = norm[cell_id]
        if a.get(cell_id) is None:
            missing += 1
        nodes.append(RawNode(cell_id, (ux, uy, 1.0 if cell.is_ff else 0.0, a.log_activity(cell_id))))
    if missing:
        log.warning("%s: %d of %d graph cells have no activity entry (defaulted to 0)",
                    n.design_name, missing, len(ordered))

    pairs: set[tuple[int, int]] = set()
    for net in n.nets:
        u = node_index.get(net.driver)
        if u is None:
            continue
        for sink in net.sinks:
            v = node_index.get(sink)
            if v is None:
                continue
            pairs.add((u, v) if u < v else (v, u))
    edges = tuple(
        RawEdge(u, v, manhattan(norm[ordered[u]], norm[ordered[v]]))
        for u, v in sorted(pairs)
    )
    return RawGraph(n.design_name, tuple(nodes), edges, node_index, hops=hops)
