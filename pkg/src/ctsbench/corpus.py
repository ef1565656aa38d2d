"""Seeded synthetic corpus: placed netlists, activity tables, surrogate QoR.

The generator stands in for a real RTL-to-placement flow. Flip-flops land in
spatial clumps that share a control-net domain and a local "flow" direction;
each flip-flop grows short combinational chains along that flow, so clusters
formed downstream have aligned gravity vectors and compact spreads. Knobs
perturb the statistics (die shape, clump tightness, chain depth, placement
noise) so no manifest column is dead.

Surrogate QoR is openly synthetic. Every metric is a documented closed-form
function of the netlist geometry, the clustered graph, the CTS knobs, and a
seeded jitter stream; it exists to exercise gap scoring and manifest plumbing,
not to model physics. Formulas (``jit`` is a per-call uniform in [0.9, 1.1),
``span`` the die half-perimeter in um, ``ff_span`` the flip-flop bounding-box
half-perimeter in um, ``disp`` the sum of per-axis population std of
normalized flip-flop coordinates, ``wire`` the summed normalized Manhattan
length of all driver-sink pairs)::

    skew_setup    = 0.02 + 0.8 * disp * (span/1000) * (20/cluster_size) * jit
    skew_hold     = 0.005 + 0.25 * (skew_setup - 0.02) * jit
    wirelength    = (50 + 0.5 * wire * span) * jit
    worst_slack_setup = 1.2 - skew_setup - 0.4 * disp * jit
    worst_slack_hold  = 0.1 * jit - skew_hold
    tns_setup     = -0.25 * n_ff * max(0, -worst_slack_setup)
    tns_hold      = -0.1 * n_ff * max(0, -worst_slack_hold)
    dynamic_power = 1e-8 * toggle_volume * jit + 2e-7 * wirelength
    static_power  = 5e-9 * n_cells * (1 + utilization/100)
    total_power   = dynamic_power + static_power
    clock_buffers = ceil(n_ff / cluster_size) + floor(ff_span / buffer_distance)
    clock_inverters = clock_buffers // 3
    routing_buffers = floor(0.8 * wirelength / max_wire_length) + n_macro_edges // 4
    repair_buffers  = ceil(40 * max(0, -worst_slack_setup)) + ceil(40 * max(0, -worst_slack_hold))

``toggle_volume`` is recovered from the clustered graph's aggregated activity
features (sum over macros of expm1(feature 8)). With all cells at one point,
``disp`` and ``ff_span`` are zero, so skew_setup equals SKEW_FLOOR_NS and
clock_buffers equals ceil(n_ff / cluster_size), its minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .activity import ActivityMap, write_saif
from .coarsen import ClusteredGraph, CoarsenConfig, build_clustered_graph
from .gap import QorRecord
from .knobs import CtsKnobs, PlacementKnobs, sample_cts_knobs, sample_placement_knobs
from .manifest import ManifestRow, write_manifest
from .netlist import CellKind, Net, PlacedCell, PlacedNetlist, write_netlist
from .rng import SplitMix64, derive_seed

# Generator shape constants (normalized coordinates unless noted).
CELL_AREA_UM2 = 3.0        # nominal footprint per cell; die area = cells*area/util
CLUMP_RADIUS = 0.010       # base sigma of flip-flop scatter around a clump center
FLOW_STEP = 0.022          # per-level displacement of logic along the clump flow
GATE_NOISE = 0.0035        # base sigma of logic placement noise (at density 0.65)
FEEDER_PROB = 0.45         # chance a chain end feeds a flip-flop's data input
CROSS_CLUMP_PROB = 0.10    # chance that feeder crosses into another clump
SHARED_SINK_PROB = 0.08    # chance a branch root is also driven by a clump mate
OUTLIER_PROB = 0.03        # chance a branch lands far from its flip-flop
IDLE_PROB = 0.12           # fraction of cells with zero switching activity
MAX_TOGGLE = 1_000_000
SAIF_DURATION = 1_000_000

LOGIC_MASTERS = ("nand2_1", "nor2_1", "inv_2", "and2_1", "xor2_1")
FF_MASTER = "dfxtp_1"

# Surrogate QoR constants (units noted in the module docstring formulas).
SKEW_FLOOR_NS = 0.02
HOLD_FLOOR_NS = 0.005
WIRE_BASE_UM = 50.0


@dataclass(frozen=True)
class CorpusSpec:
    """Shape of a generated corpus; the desk-scale analogue of a design suite."""

    n_designs: int = 3
    placements_per_design: int = 3
    cts_per_placement: int = 4
    cells: tuple[int, int] = (220, 420)
    ff_fraction: tuple[float, float] = (0.16, 0.28)
    seed: int = 20260811

    def __post_init__(self) -> None:
        for name in ("n_designs", "placements_per_design", "cts_per_placement"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        lo, hi = self.cells
        if lo < 2 or hi < lo:
            raise ValueError("cells range must satisfy 2 <= lo <= hi")
        flo, fhi = self.ff_fraction
        if not (0.0 < flo <= fhi < 1.0):
            raise ValueError("ff_fraction range must lie in (0, 1)")

    @property
    def total_rows(self) -> int:
        return self.n_designs * self.placements_per_design * self.cts_per_placement


#: The pinned corpus used for golden-number and compression-band checks.
REFERENCE_SPEC = CorpusSpec()


def _unit_direction(rng: SplitMix64) -> tuple[float, float]:
    """Uniform direction on the unit circle without trigonometry."""
    while True:
        dx = rng.uniform_in(-1.0, 1.0)
        dy = rng.uniform_in(-1.0, 1.0)
        r = math.hypot(dx, dy)
        if 1e-3 < r <= 1.0:
            return dx / r, dy / r


def _clip01(v: float) -> float:
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


def generate_netlist(
    knobs: PlacementKnobs,
    size: int,
    seed: int,
    ff_fraction: float = 0.2,
    design_name: str = "synth",
) -> tuple[PlacedNetlist, ActivityMap]:
    """Generate one placed netlist plus its toggle table (deterministic)."""
    if size < 2:
        raise ValueError("size must be >= 2")
    rng = SplitMix64(seed)
    n_ff = min(max(1, round(size * ff_fraction)), size - 1)
    n_logic = size - n_ff

    utilization = knobs.core_utilization / 100.0
    area = size * CELL_AREA_UM2 / utilization
    die_w = math.sqrt(area / knobs.aspect_ratio)
    die_h = knobs.aspect_ratio * die_w

    # Clump layout: centers, flow directions, control domains, tightness.
    target_clump = rng.int_in(6, 9)
    n_clumps = max(1, round(n_ff / target_clump))
    n_domains = rng.int_in(1, 4)
    lo, hi = (0.25, 0.75) if knobs.io_mode == 1 else (0.08, 0.92)
    clump_centers = []
    clump_dirs = []
    clump_domains: list[str | None] = []
    clump_radii = []
    for _ in range(n_clumps):
        clump_centers.append((rng.uniform_in(lo, hi), rng.uniform_in(lo, hi)))
        clump_dirs.append(_unit_direction(rng))
        clump_domains.append(None if rng.uniform() < 0.15 else f"rst{rng.below(n_domains)}")
        radius = CLUMP_RADIUS * rng.uniform_in(0.8, 1.2)
        clump_radii.append(radius * 0.8 if knobs.time_driven else radius)

    per_clump = math.ceil(n_ff / n_clumps)
    ff_ids = [f"ff{i:04d}" for i in range(n_ff)]
    ff_clump = [i // per_clump for i in range(n_ff)]
    positions: dict[str, tuple[float, float]] = {}
    for i, ff in enumerate(ff_ids):
        cx, cy = clump_centers[ff_clump[i]]
        r = clump_radii[ff_clump[i]]
        positions[ff] = (_clip01(cx + rng.normal(0, r)), _clip01(cy + rng.normal(0, r)))

    depth_max = 2 if knobs.strategy_index < 3 else 3
    step = FLOW_STEP * (0.9 + 0.04 * knobs.strategy_index)
    noise = GATE_NOISE * (0.65 / knobs.target_density)
    if knobs.routability_driven:
        noise *= 1.25

    clump_members: dict[int, list[int]] = {}
    for i in range(n_ff):
        clump_members.setdefault(ff_clump[i], []).append(i)

    first_level: dict[str, list[str]] = {ff: [] for ff in ff_ids}
    chain_links: list[tuple[str, str]] = []
    feeders: list[tuple[str, str]] = []
    gate_ids: list[str] = []
    budget = n_logic
    gate_idx = 0
    turn = 0
    while budget > 0:
        i = turn % n_ff
        turn += 1
        ff = ff_ids[i]
        fx, fy = positions[ff]
        dx, dy = clump_dirs[ff_clump[i]]
        depth = min(budget, rng.int_in(1, depth_max))
        # An outlier branch lands several flow-steps away, inflating the
        # cluster's spatial spread (exercises the spread bypass downstream).
        outlier = rng.uniform() < OUTLIER_PROB
        reach = step * (5.0 if outlier else 1.0)
        branch_noise = noise * (2.0 if outlier else 1.0)
        prev: str | None = None
        for level in range(1, depth + 1):
            gid = f"g{gate_idx:05d}"
            gate_idx += 1
            gate_ids.append(gid)
            positions[gid] = (
                _clip01(fx + dx * reach * level + rng.normal(0, branch_noise)),
                _clip01(fy + dy * reach * level + rng.normal(0, branch_noise)),
            )
            if prev is None:
                first_level[ff].append(gid)
                mates = clump_members[ff_clump[i]]
                if len(mates) > 1 and rng.uniform() < SHARED_SINK_PROB:
                    mate = ff_ids[mates[(mates.index(i) + 1) % len(mates)]]
                    first_level[mate].append(gid)
            else:
                chain_links.append((prev, gid))
            prev = gid
            budget -= 1
        if n_ff > 1 and prev is not None and rng.uniform() < FEEDER_PROB:
            mates = clump_members[ff_clump[i]]
            if len(mates) > 1 and rng.uniform() >= CROSS_CLUMP_PROB:
                target = ff_ids[mates[(mates.index(i) + 1) % len(mates)]]
            else:
                k = rng.below(n_ff - 1)
                target = ff_ids[k if k < i else k + 1]
            if target != ff:
                feeders.append((prev, target))

    cells = []
    for i, ff in enumerate(ff_ids):
        ux, uy = positions[ff]
        cells.append(PlacedCell(
            id=ff, kind=CellKind.FLIP_FLOP,
            x=min(ux * die_w, die_w), y=min(uy * die_h, die_h),
            master=FF_MASTER, control_net=clump_domains[ff_clump[i]],
        ))
    for gid in gate_ids:
        ux, uy = positions[gid]
        cells.append(PlacedCell(
            id=gid, kind=CellKind.LOGIC,
            x=min(ux * die_w, die_w), y=min(uy * die_h, die_h),
            master=rng.choice(LOGIC_MASTERS),
        ))

    nets = []
    for ff in ff_ids:
        if first_level[ff]:
            nets.append(Net(id=f"n_{ff}_fo", driver=ff, sinks=tuple(first_level[ff])))
    for a, b in chain_links:
        nets.append(Net(id=f"n_{a}_c", driver=a, sinks=(b,)))
    for g, ff in feeders:
        nets.append(Net(id=f"n_{g}_f", driver=g, sinks=(ff,)))

    toggles: dict[str, int] = {}
    for cell_id in ff_ids + gate_ids:
        u = rng.uniform()
        if u < IDLE_PROB:
            toggles[cell_id] = 0
        else:
            toggles[cell_id] = min(MAX_TOGGLE, int((1.0 / (1.0 - u)) ** 1.5))

    netlist = PlacedNetlist(
        design_name=design_name,
        die_width=die_w,
        die_height=die_h,
        cells=tuple(cells),
        nets=tuple(nets),
    )
    return netlist, ActivityMap(toggles)


def _ff_geometry(n: PlacedNetlist) -> tuple[float, float]:
    """(dispersion, bbox half-perimeter in um) over flip-flop positions."""
    xs = [c.x / n.die_width for c in n.flip_flops]
    ys = [c.y / n.die_height for c in n.flip_flops]
    k = len(xs)
    mx, my = sum(xs) / k, sum(ys) / k
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs) / k)
    sy = math.sqrt(sum((y - my) ** 2 for y in ys) / k)
    span_x = (max(c.x for c in n.flip_flops) - min(c.x for c in n.flip_flops))
    span_y = (max(c.y for c in n.flip_flops) - min(c.y for c in n.flip_flops))
    return sx + sy, span_x + span_y


def _net_wire_length(n: PlacedNetlist) -> float:
    """Summed normalized Manhattan length over all driver-sink pairs."""
    norm = {c.id: (c.x / n.die_width, c.y / n.die_height) for c in n.cells}
    total = 0.0
    for net in n.nets:
        dx, dy = norm[net.driver]
        for sink in net.sinks:
            sx, sy = norm[sink]
            total += abs(dx - sx) + abs(dy - sy)
    return total


def surrogate_qor(n: PlacedNetlist, g: ClusteredGraph, k: CtsKnobs, seed: int) -> QorRecord:
    """Deterministic analytic QoR stand-in; formulas in the module docstring."""
    rng = SplitMix64(seed)

    def jit() -> float:
        return rng.uniform_in(0.9, 1.1)

    n_ff = len(n.flip_flops)
    n_cells = len(n.cells)
    disp, ff_span = _ff_geometry(n)
    span = n.die_width + n.die_height
    wire = _net_wire_length(n)
    toggle_volume = float(sum(math.expm1(m.features[8]) for m in g.nodes))

    skew_setup = SKEW_FLOOR_NS + 0.8 * disp * (span / 1000.0) * (20.0 / k.cluster_size) * jit()
    skew_hold = HOLD_FLOOR_NS + 0.25 * (skew_setup - SKEW_FLOOR_NS) * jit()
    wirelength = (WIRE_BASE_UM + 0.5 * wire * span) * jit()
    worst_slack_setup = 1.2 - skew_setup - 0.4 * disp * jit()
    worst_slack_hold = 0.1 * jit() - skew_hold
    dynamic_power = 1e-8 * toggle_volume * jit() + 2e-7 * wirelength
    utilization = min(100.0, n_cells * CELL_AREA_UM2 / (n.die_width * n.die_height) * 100.0)
    static_power = 5e-9 * n_cells * (1.0 + utilization / 100.0)
    clock_buffers = math.ceil(n_ff / k.cluster_size) + int(ff_span / k.buffer_distance)

    return QorRecord(
        skew_setup=skew_setup,
        skew_hold=skew_hold,
        worst_slack_setup=worst_slack_setup,
        worst_slack_hold=worst_slack_hold,
        tns_setup=-0.25 * n_ff * max(0.0, -worst_slack_setup),
        tns_hold=-0.1 * n_ff * max(0.0, -worst_slack_hold),
        total_power=dynamic_power + static_power,
        dynamic_power=dynamic_power,
        static_power=static_power,
        wirelength=wirelength,
        cell_utilization=utilization,
        clock_buffers=clock_buffers,
        clock_inverters=clock_buffers // 3,
        routing_buffers=int(0.8 * wirelength / k.max_wire_length) + len(g.edges) // 4,
        repair_buffers=math.ceil(40 * max(0.0, -worst_slack_setup))
        + math.ceil(40 * max(0.0, -worst_slack_hold)),
    )


def coarsen_seed(root_seed: int, design_index: int, placement_index: int) -> int:
    """The per-placement clustering seed; shared by corpus QoR and archive builds."""
    return derive_seed(root_seed, "coarsen", design_index, placement_index)


@dataclass(frozen=True)
class PlacementEntry:
    design_name: str
    design_index: int
    placement_id: str
    placement_index: int
    directory: Path

    @property
    def netlist_path(self) -> Path:
        return self.directory / "netlist.pnl.json"

    @property
    def activity_path(self) -> Path:
        return self.directory / "activity.saif"


@dataclass(frozen=True)
class CorpusSummary:
    designs: tuple[str, ...]
    placements: tuple[PlacementEntry, ...]
    rows: tuple[ManifestRow, ...]
    manifest_path: Path


def generate_corpus(spec: CorpusSpec, out_dir: str | Path) -> CorpusSummary:
    """Write the corpus tree and the manifest skeleton (knobs + QoR columns).

    Layout: ``<out>/<design>/<placement_id>/netlist.pnl.json`` plus
    ``activity.saif``, and a top-level ``manifest.csv`` whose gap and graph
    path columns are left blank for later pipeline stages.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    designs = []
    placements = []
    rows = []
    for d in range(spec.n_designs):
        rng_d = SplitMix64(derive_seed(spec.seed, "design", d))
        design_name = f"synth{d:02d}"
        designs.append(design_name)
        size = rng_d.int_in(*spec.cells)
        ff_fraction = rng_d.uniform_in(*spec.ff_fraction)
        for p in range(spec.placements_per_design):
            rng_p = SplitMix64(derive_seed(spec.seed, "placement", d, p))
            pk = sample_placement_knobs(rng_p)
            netlist, activity = generate_netlist(
                pk, size, derive_seed(spec.seed, "netlist", d, p), ff_fraction, design_name
            )
            placement_id = f"p{p:03d}"
            pdir = out / design_name / placement_id
            pdir.mkdir(parents=True, exist_ok=True)
            entry = PlacementEntry(design_name, d, placement_id, p, pdir)
            entry.netlist_path.write_bytes(write_netlist(netlist))
            entry.activity_path.write_bytes(write_saif(activity, duration=SAIF_DURATION))
            placements.append(entry)

            clustered = build_clustered_graph(
                netlist, activity, CoarsenConfig(seed=coarsen_seed(spec.seed, d, p))
            )
            for v in range(spec.cts_per_placement):
                rng_v = SplitMix64(derive_seed(spec.seed, "cts", d, p, v))
                ck = sample_cts_knobs(rng_v)
                qor = surrogate_qor(netlist, clustered, ck, derive_seed(spec.seed, "qor", d, p, v))
                rows.append(ManifestRow(
                    design_name=design_name,
                    placement_id=placement_id,
                    cts_variant_id=f"v{v:02d}",
                    placement=pk,
                    cts=ck,
                    qor=qor,
                ))

    manifest_path = out / "manifest.csv"
    write_manifest(rows, manifest_path)
    return CorpusSummary(tuple(designs), tuple(placements), tuple(rows), manifest_path)
