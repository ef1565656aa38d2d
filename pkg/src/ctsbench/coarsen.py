"""Three-step physics-aware coarsening of a placed netlist.

Step I    Each flip-flop, visited in a seeded pseudorandom order, claims its
          combinational fan-out by BFS over driver-to-sink links, stopping at
          flip-flops and at gates already claimed; every gate ends up in at
          most one atomic cluster.
Step II   Atomic clusters whose spatial spread max(sigma_x, sigma_y) exceeds
          the threshold bypass merging and stay singleton macro-nodes.
Step III  Remaining clusters, in the same seeded order, greedily join the
          first open macro whose control net matches, whose running centroid
          is within the merge distance (Manhattan), and whose seed cluster's
          gravity vector is aligned above the cosine threshold; otherwise
          they open a new macro.

All geometry is in die-normalized coordinates. The flip-flop permutation is
driven by SplitMix64 (see :mod:`ctsbench.rng` for the bit-exact definition),
so a (netlist, activity, config) triple always yields the same graph.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .activity import ActivityMap
from .netlist import PlacedNetlist, normalize_coords
from .rawgraph import EmptyGraphError, fanout_node_set, manhattan
from .rng import SplitMix64

_EMPTY_ACTIVITY = ActivityMap({})


@dataclass(frozen=True)
class GravityVector:
    """Displacement from a flip-flop to the centroid of its one-hop neighbors."""

    dx: float
    dy: float

    @property
    def norm(self) -> float:
        return math.hypot(self.dx, self.dy)

    def is_zero(self) -> bool:
        return self.dx == 0.0 and self.dy == 0.0


@dataclass(frozen=True)
class CoarsenConfig:
    seed: int = 0
    spread_threshold: float = 0.05
    merge_distance: float = 0.05
    cos_threshold: float = 0.9

    def __post_init__(self) -> None:
        if self.spread_threshold <= 0:
            raise ValueError("spread_threshold must be > 0")
        if self.merge_distance <= 0:
            raise ValueError("merge_distance must be > 0")
        if not (-1.0 < self.cos_threshold <= 1.0):
            raise ValueError("cos_threshold must lie in (-1, 1]")


@dataclass(frozen=True)
class AtomicCluster:
    """One flip-flop plus the combinational gates it claimed."""

    owner_ff: str
    members: frozenset[str]
    centroid: tuple[float, float]
    spread: tuple[float, float]
    gravity: GravityVector
    control_net: str | None

    @property
    def max_spread(self) -> float:
        return max(self.spread)

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MacroNode:
    """A merged group of atomic clusters with 10 aggregated features:
    [centroid_x, centroid_y, sigma_x, sigma_y, ln(1+size), n_ff, n_logic,
    ln(1+max_toggle), ln(1+sum_toggle), nonzero_toggle_count]."""

    members: tuple[AtomicCluster, ...]  # in merge order; members[0] is the seed
    features: tuple[float, ...]

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.features[0], self.features[1])

    @property
    def cell_ids(self) -> frozenset[str]:
        out: set[str] = set()
        for atomic in self.members:
            out |= atomic.members
        return frozenset(out)

    @property
    def n_ff(self) -> int:
        return len(self.members)

    @property
    def size(self) -> int:
        return len(self.cell_ids)


@dataclass(frozen=True)
class ClusteredGraph:
    design_name: str
    nodes: tuple[MacroNode, ...]
    edges: tuple[tuple[int, int, float], ...]  # (src, dst, centroid manhattan)
    assignment: Mapping[str, int]
    config: CoarsenConfig
    raw_node_count: int
    unclaimed_logic: int

    @property
    def compression_ratio(self) -> float:
        return self.raw_node_count / len(self.nodes)

    def feature_matrix(self) -> np.ndarray:
        return np.array([m.features for m in self.nodes], dtype="<f4").reshape(len(self.nodes), 10)

    def edge_index_array(self) -> np.ndarray:
        return np.array(
            [[e[0] for e in self.edges], [e[1] for e in self.edges]], dtype="<i8"
        ).reshape(2, len(self.edges))

    def edge_weight_array(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype="<f4")


def _centroid_spread(points: list[tuple[float, float]]) -> tuple[tuple[float, float], tuple[float, float]]:
    k = len(points)
    cx = sum(p[0] for p in points) / k
    cy = sum(p[1] for p in points) / k
    sx = math.sqrt(sum((p[0] - cx) ** 2 for p in points) / k)
    sy = math.sqrt(sum((p[1] - cy) ** 2 for p in points) / k)
    return (cx, cy), (sx, sy)


def spread(members: Iterable[str], n: PlacedNetlist) -> tuple[float, float]:
    """Population standard deviation of member cells' normalized coordinates."""
    norm = normalize_coords(n)
    points = [norm[m] for m in members]
    if not points:
        raise ValueError("member set must be nonempty")
    return _centroid_spread(points)[1]


def _one_hop_neighbors(ff: str, n: PlacedNetlist) -> set[str]:
    neighbors: set[str] = set()
    for net in n.nets:
        if net.driver == ff or ff in net.sinks:
            neighbors.add(net.driver)
            neighbors.update(net.sinks)
    neighbors.discard(ff)
    return neighbors


def gravity_vector(ff: str, n: PlacedNetlist) -> GravityVector:
    """Displacement from the flip-flop to the centroid of every cell sharing a
    net with it; the zero vector when it has no neighbors."""
    if not n.cell(ff).is_ff:
        raise ValueError(f"{ff!r} is not a flip-flop")
    neighbors = _one_hop_neighbors(ff, n)
    if not neighbors:
        return GravityVector(0.0, 0.0)
    norm = normalize_coords(n)
    cx = sum(norm[m][0] for m in neighbors) / len(neighbors)
    cy = sum(norm[m][1] for m in neighbors) / len(neighbors)
    fx, fy = norm[ff]
    return GravityVector(cx - fx, cy - fy)


def cosine_similarity(a: GravityVector, b: GravityVector) -> float:
    """Cosine of the angle between gravity vectors; 0.0 when either is zero
    (an isolated flip-flop expresses no pull and never merges on alignment)."""
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        return 0.0
    return (a.dx * b.dx + a.dy * b.dy) / (na * nb)


def ff_permutation(n: PlacedNetlist, seed: int) -> list[str]:
    """Seeded pseudorandom permutation of the flip-flop ids."""
    order = sorted(ff.id for ff in n.flip_flops)
    SplitMix64(seed).shuffle(order)
    return order


def form_atomic_clusters(n: PlacedNetlist, seed: int) -> list[AtomicCluster]:
    """Step I: BFS claiming in seeded flip-flop order.

    Returns one cluster per flip-flop, in visit order. Logic unreachable from
    any flip-flop fan-out stays unclaimed (see :func:`unclaimed_logic_cells`).
    """
    index = n.cell_index
    norm = normalize_coords(n)
    # Gravity neighbor sets for all FFs in one pass over the nets.
    ff_ids = {ff.id for ff in n.flip_flops}
    neighbors: dict[str, set[str]] = {ff: set() for ff in ff_ids}
    for net in n.nets:
        on_net = (net.driver,) + net.sinks
        for cell_id in on_net:
            if cell_id in ff_ids:
                neighbors[cell_id].update(c for c in on_net if c != cell_id)

    claimed: set[str] = set()
    clusters = []
    for ff in ff_permutation(n, seed):
        members = {ff}
        queue = deque([ff])
        while queue:
            cur = queue.popleft()
            for net in n.nets_by_driver.get(cur, ()):
                for sink in net.sinks:
                    if index[sink].is_ff or sink in claimed or sink in members:
                        continue
                    members.add(sink)
                    queue.append(sink)
        claimed |= members

        centroid, sig = _centroid_spread([norm[m] for m in members])
        hood = neighbors[ff]
        if hood:
            cx = sum(norm[m][0] for m in hood) / len(hood)
            cy = sum(norm[m][1] for m in hood) / len(hood)
            fx, fy = norm[ff]
            gravity = GravityVector(cx - fx, cy - fy)
        else:
            gravity = GravityVector(0.0, 0.0)
        clusters.append(
            AtomicCluster(
                owner_ff=ff,
                members=frozenset(members),
                centroid=centroid,
                spread=sig,
                gravity=gravity,
                control_net=index[ff].control_net,
            )
        )
    return clusters


def unclaimed_logic_cells(n: PlacedNetlist, clusters: Iterable[AtomicCluster]) -> set[str]:
    """Logic cells not reached by any flip-flop's fan-out BFS."""
    claimed: set[str] = set()
    for cluster in clusters:
        claimed |= cluster.members
    return {c.id for c in n.cells if not c.is_ff} - claimed


class _OpenMacro:
    __slots__ = ("atomics", "closed", "sum_x", "sum_y", "cell_count", "seed_gravity", "control_net")

    def __init__(self, atomic: AtomicCluster, norm, closed: bool) -> None:
        self.atomics = [atomic]
        self.closed = closed
        self.sum_x = sum(norm[m][0] for m in atomic.members)
        self.sum_y = sum(norm[m][1] for m in atomic.members)
        self.cell_count = len(atomic.members)
        self.seed_gravity = atomic.gravity
        self.control_net = atomic.control_net

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.sum_x / self.cell_count, self.sum_y / self.cell_count)

    def absorb(self, atomic: AtomicCluster, norm) -> None:
        self.atomics.append(atomic)
        self.sum_x += sum(norm[m][0] for m in atomic.members)
        self.sum_y += sum(norm[m][1] for m in atomic.members)
        self.cell_count += len(atomic.members)


def _macro_features(atomics: list[AtomicCluster], norm, activity: ActivityMap) -> tuple[float, ...]:
    cells: list[str] = []
    for atomic in atomics:
        cells.extend(atomic.members)
    (cx, cy), (sx, sy) = _centroid_spread([norm[c] for c in cells])
    size = len(cells)
    n_ff = len(atomics)
    toggles = [activity.get(c) or 0 for c in cells]
    return (
        cx,
        cy,
        sx,
        sy,
        math.log1p(size),
        float(n_ff),
        float(size - n_ff),
        math.log1p(max(toggles)),
        math.log1p(sum(toggles)),
        float(sum(1 for t in toggles if t > 0)),
    )


def merge_clusters(
    atomics: list[AtomicCluster],
    cfg: CoarsenConfig,
    n: PlacedNetlist,
    activity: ActivityMap | None = None,
) -> list[MacroNode]:
    """Steps II-III: spread bypass, then greedy gravity-aligned merging.

    Atomics are visited in the given (seeded) order; a compact atomic joins
    the first open macro that passes all three predicates against the macro's
    running centroid and its seed atomic's gravity vector. High-spread atomics
    become closed singleton macros and are never merge targets.
    """
    activity = activity if activity is not None else _EMPTY_ACTIVITY
    norm = normalize_coords(n)
    macros: list[_OpenMacro] = []
    for atomic in atomics:
        if atomic.max_spread > cfg.spread_threshold:
            macros.append(_OpenMacro(atomic, norm, closed=True))
            continue
        target = None
        for macro in macros:
            if macro.closed:
                continue
            if macro.control_net != atomic.control_net:
                continue
            if manhattan(atomic.centroid, macro.centroid) >= cfg.merge_distance:
                continue
            if cosine_similarity(atomic.gravity, macro.seed_gravity) <= cfg.cos_threshold:
                continue
            target = macro
            break
        if target is None:
            macros.append(_OpenMacro(atomic, norm, closed=False))
        else:
            target.absorb(atomic, norm)
    return [
        MacroNode(tuple(m.atomics), _macro_features(m.atomics, norm, activity))
        for m in macros
    ]


def build_clustered_graph(n: PlacedNetlist, a: ActivityMap, cfg: CoarsenConfig) -> ClusteredGraph:
    """Compose the three steps and recompute connectivity between macros.

    The clustered edge set is exactly the net-expanded driver-sink pairs whose
    endpoints land in different macros, deduplicated and weighted by the
    Manhattan distance between macro centroids.
    """
    atomics = form_atomic_clusters(n, cfg.seed)
    macros = merge_clusters(atomics, cfg, n, activity=a)
    if not macros:
        raise EmptyGraphError("clustering produced no macro-nodes")

    assignment: dict[str, int] = {}
    for idx, macro in enumerate(macros):
        for cell_id in macro.cell_ids:
            assignment[cell_id] = idx

    pairs: set[tuple[int, int]] = set()
    for net in n.nets:
        mu = assignment.get(net.driver)
        if mu is None:
            continue
        for sink in net.sinks:
            mv = assignment.get(sink)
            if mv is None or mv == mu:
                continue
            pairs.add((mu, mv) if mu < mv else (mv, mu))
    edges = tuple(
        (u, v, manhattan(macros[u].centroid, macros[v].centroid)) for u, v in sorted(pairs)
    )

    n_logic = sum(1 for c in n.cells if not c.is_ff)
    claimed_logic = len(assignment) - len(atomics)
    return ClusteredGraph(
        design_name=n.design_name,
        nodes=tuple(macros),
        edges=edges,
        assignment=assignment,
        config=cfg,
        raw_node_count=len(fanout_node_set(n, hops=1)),
        unclaimed_logic=n_logic - claimed_logic,
    )
