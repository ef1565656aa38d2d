"""Efficiency harness: compression, footprint, and runtime for a corpus.

For every placement the harness builds the raw and clustered graphs, measures
build times as the median of N repetitions, and sizes both serialized archive
footprints. Counts and ratios are deterministic; wall-times are not, so the
report is split into ``report.json`` (full, includes times) and
``report_data.csv`` (counts/ratios only, byte-stable across runs).

GPU memory is deliberately out of scope; serialized and in-memory footprint
ratios are the portable proxies reported here.
"""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .activity import parse_saif
from .archive import archive_bytes
from .coarsen import CoarsenConfig, build_clustered_graph, form_atomic_clusters, merge_clusters
from .corpus import coarsen_seed
from .errors import CtsBenchError
from .netlist import parse_netlist
from .rawgraph import build_raw_graph

# Test-only hook: extra sleep injected inside every timed section.
_TEST_DELAY_S = 0.0


class EmptyCorpusError(CtsBenchError):
    """No placements found, or a report with no rows was given to plot."""


@dataclass(frozen=True)
class PlacementEfficiency:
    design: str
    placement: str
    raw_nodes: int
    raw_edges: int
    clustered_nodes: int
    clustered_edges: int
    node_compression: float
    edge_compression: float | None  # None when the clustered graph has no edges
    raw_bytes: int
    clustered_bytes: int
    footprint_ratio: float
    unclaimed_logic: int
    build_time_raw: float
    build_time_clustered: float
    coarsen_time: float


AGGREGATE_FIELDS = (
    "raw_nodes", "raw_edges", "clustered_nodes", "clustered_edges",
    "node_compression", "edge_compression", "raw_bytes", "clustered_bytes",
    "footprint_ratio", "build_time_raw", "build_time_clustered", "coarsen_time",
)

DATA_FIELDS = (
    "design", "placement", "raw_nodes", "raw_edges", "clustered_nodes",
    "clustered_edges", "node_compression", "edge_compression", "raw_bytes",
    "clustered_bytes", "footprint_ratio", "unclaimed_logic",
)


@dataclass(frozen=True)
class EfficiencyReport:
    mode: str  # "latency" (sequential) or "throughput" (--parallel)
    repetitions: int
    rows: tuple[PlacementEfficiency, ...]
    aggregates: dict[str, tuple[float, float, float]]  # field -> (mean, min, max)

    @property
    def mean_node_compression(self) -> float:
        return self.aggregates["node_compression"][0]


def find_placements(corpus_dir: str | Path) -> list[tuple[str, str, Path]]:
    """Sorted (design, placement, dir) triples below a corpus root."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise EmptyCorpusError(f"corpus directory not found: {corpus_dir}")
    out = []
    for netlist_path in sorted(corpus_dir.glob("*/*/netlist.pnl.json")):
        pdir = netlist_path.parent
        out.append((pdir.parent.name, pdir.name, pdir))
    if not out:
        raise EmptyCorpusError(f"no placements under {corpus_dir}")
    return out


def _timed(fn, repetitions: int):
    """Median wall-time of `repetitions` calls; returns (result, seconds)."""
    result = None
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        result = fn()
        if _TEST_DELAY_S:
            time.sleep(_TEST_DELAY_S)
        samples.append(time.perf_counter() - start)
    return result, statistics.median(samples)


def _measure_placement(design: str, placement: str, pdir: Path,
                       cfg: CoarsenConfig, repetitions: int,
                       design_index: int, placement_index: int) -> PlacementEfficiency:
    netlist = parse_netlist(pdir.joinpath("netlist.pnl.json").read_bytes())
    activity = parse_saif(pdir.joinpath("activity.saif").read_bytes())
    seed = coarsen_seed(cfg.seed, design_index, placement_index)
    local_cfg = CoarsenConfig(
        seed=seed,
        spread_threshold=cfg.spread_threshold,
        merge_distance=cfg.merge_distance,
        cos_threshold=cfg.cos_threshold,
    )

    raw, t_raw = _timed(lambda: build_raw_graph(netlist, activity), repetitions)
    clustered, t_clustered = _timed(
        lambda: build_clustered_graph(netlist, activity, local_cfg), repetitions
    )

    def coarsen_only():
        atomics = form_atomic_clusters(netlist, local_cfg.seed)
        return merge_clusters(atomics, local_cfg, netlist, activity=activity)

    _, t_coarsen = _timed(coarsen_only, repetitions)

    raw_blob = archive_bytes(raw)
    clustered_blob = archive_bytes(clustered)
    clustered_edges = len(clustered.edges)
    return PlacementEfficiency(
        design=design,
        placement=placement,
        raw_nodes=len(raw.nodes),
        raw_edges=len(raw.edges),
        clustered_nodes=len(clustered.nodes),
        clustered_edges=clustered_edges,
        node_compression=len(raw.nodes) / len(clustered.nodes),
        edge_compression=(len(raw.edges) / clustered_edges) if clustered_edges else None,
        raw_bytes=len(raw_blob),
        clustered_bytes=len(clustered_blob),
        footprint_ratio=len(raw_blob) / len(clustered_blob),
        unclaimed_logic=clustered.unclaimed_logic,
        build_time_raw=t_raw,
        build_time_clustered=t_clustered,
        coarsen_time=t_coarsen,
    )


def run_benchmark(
    corpus_dir: str | Path,
    cfg: CoarsenConfig,
    repetitions: int = 5,
    parallel: bool = False,
) -> EfficiencyReport:
    """Measure every placement; sequential by default for timing stability."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    placements = find_placements(corpus_dir)
    design_order = sorted({design for design, _, _ in placements})
    design_index = {name: i for i, name in enumerate(design_order)}
    placement_index: dict[tuple[str, str], int] = {}
    for design in design_order:
        names = sorted(p for d, p, _ in placements if d == design)
        for j, p in enumerate(names):
            placement_index[(design, p)] = j

    def work(item):
        design, placement, pdir = item
        return _measure_placement(
            design, placement, pdir, cfg, repetitions,
            design_index[design], placement_index[(design, placement)],
        )

    if parallel:
        with ThreadPoolExecutor() as pool:
            rows = tuple(pool.map(work, placements))
    else:
        rows = tuple(work(item) for item in placements)

    aggregates = {}
    for name in AGGREGATE_FIELDS:
        values = [getattr(r, name) for r in rows if getattr(r, name) is not None]
        if values:
            aggregates[name] = (
                sum(values) / len(values), float(min(values)), float(max(values))
            )
    return EfficiencyReport(
        mode="throughput" if parallel else "latency",
        repetitions=repetitions,
        rows=rows,
        aggregates=aggregates,
    )


def write_report(report: EfficiencyReport, out_dir: str | Path) -> dict[str, Path]:
    """Emit report.json (with times) and the deterministic report_data.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    payload = {
        "mode": report.mode,
        "repetitions": report.repetitions,
        "rows": [asdict(r) for r in report.rows],
        "aggregates": {k: list(v) for k, v in report.aggregates.items()},
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    csv_path = out / "report_data.csv"
    lines = [",".join(DATA_FIELDS)]
    for r in report.rows:
        values = []
        for name in DATA_FIELDS:
            v = getattr(r, name)
            values.append("" if v is None else (repr(v) if isinstance(v, float) else str(v)))
        lines.append(",".join(values))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"json": json_path, "data": csv_path}


def plot_report(report: EfficiencyReport, out_dir: str | Path) -> dict[str, Path]:
    """Compression scatter and efficiency bars, each with a CSV data twin."""
    if not report.rows:
        raise EmptyCorpusError("cannot plot an empty report")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    scatter_csv = out / "compression_scatter.csv"
    lines = ["design,placement,raw_nodes,clustered_nodes"]
    for r in report.rows:
        lines.append(f"{r.design},{r.placement},{r.raw_nodes},{r.clustered_nodes}")
    scatter_csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths["scatter_data"] = scatter_csv

    fig, ax = plt.subplots(figsize=(6, 4))
    designs = sorted({r.design for r in report.rows})
    for design in designs:
        xs = [r.raw_nodes for r in report.rows if r.design == design]
        ys = [r.clustered_nodes for r in report.rows if r.design == design]
        ax.scatter(xs, ys, label=design, s=24)
    ax.set_xlabel("raw nodes")
    ax.set_ylabel("clustered nodes")
    ax.set_title("Graph compression per placement")
    ax.legend(fontsize=8)
    scatter_png = out / "compression_scatter.png"
    fig.savefig(scatter_png, dpi=100, metadata={"Software": None})
    plt.close(fig)
    paths["scatter"] = scatter_png

    bars_csv = out / "efficiency_bars.csv"
    lines = ["label,node_compression,footprint_ratio"]
    labels = [f"{r.design}/{r.placement}" for r in report.rows]
    for label, r in zip(labels, report.rows):
        lines.append(f"{label},{r.node_compression!r},{r.footprint_ratio!r}")
    bars_csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths["bars_data"] = bars_csv

    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(labels)), 4))
    xs = range(len(labels))
    width = 0.4
    ax.bar([x - width / 2 for x in xs], [r.node_compression for r in report.rows],
           width=width, label="node compression")
    ax.bar([x + width / 2 for x in xs], [r.footprint_ratio for r in report.rows],
           width=width, label="footprint ratio")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("ratio (raw / clustered)")
    ax.set_title(f"Efficiency ({report.mode} mode)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    bars_png = out / "efficiency_bars.png"
    fig.savefig(bars_png, dpi=100, metadata={"Software": None})
    plt.close(fig)
    paths["bars"] = bars_png
    return paths
