"""The benchmark manifest: one CSV row per (placement, CTS variant).

Column order is fixed (see ``MANIFEST_COLUMNS``): identity, placement knobs,
CTS knobs, the 15 QoR labels, gap scores, and graph archive paths. Floats are
written with shortest round-trip formatting, cells are RFC-4180 quoted, and
rows sort by (design_name, placement_id, cts_variant_id).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .archive import read_archive
from .errors import CtsBenchError
from .gap import (
    QOR_COUNT_FIELDS,
    QOR_FIELDS,
    DesignGroup,
    QorRecord,
    gap_vector,
    pareto_distance,
)
from .knobs import CtsKnobs, PlacementKnobs

GAP_TOLERANCE = 1e-9

PLACEMENT_KNOB_COLUMNS = (
    "synth_strategy", "aspect_ratio", "io_mode", "core_utilization",
    "target_density", "time_driven", "routability_driven",
)
CTS_KNOB_COLUMNS = ("sink_max_dia", "max_wire_length", "cluster_size", "buffer_distance")
GAP_COLUMNS = ("g_skew", "g_power", "g_wl", "pareto_distance")
PATH_COLUMNS = ("raw_graph_path", "clustered_graph_path")

MANIFEST_COLUMNS: tuple[str, ...] = (
    ("design_name", "placement_id", "cts_variant_id")
    + PLACEMENT_KNOB_COLUMNS
    + CTS_KNOB_COLUMNS
    + QOR_FIELDS
    + GAP_COLUMNS
    + PATH_COLUMNS
)


class MissingArtifactError(CtsBenchError):
    """A graph path in the manifest does not resolve to an archive."""

    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(f"missing graph archive: {path}")


class InconsistentGapError(CtsBenchError):
    """Stored gap columns disagree with recomputation from the QoR columns."""


@dataclass(frozen=True)
class ManifestRow:
    design_name: str
    placement_id: str
    cts_variant_id: str
    placement: PlacementKnobs
    cts: CtsKnobs
    qor: QorRecord
    g_skew: float | None = None
    g_power: float | None = None
    g_wl: float | None = None
    pareto_distance: float | None = None
    raw_graph_path: str | None = None
    clustered_graph_path: str | None = None

    @property
    def run_id(self) -> str:
        return f"{self.placement_id}/{self.cts_variant_id}"

    def sort_key(self) -> tuple[str, str, str]:
        return (self.design_name, self.placement_id, self.cts_variant_id)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row_values(row: ManifestRow) -> list[str]:
    values = [row.design_name, row.placement_id, row.cts_variant_id]
    values += [_format(getattr(row.placement, c)) for c in PLACEMENT_KNOB_COLUMNS]
    values += [_format(getattr(row.cts, c)) for c in CTS_KNOB_COLUMNS]
    values += [_format(getattr(row.qor, c)) for c in QOR_FIELDS]
    values += [_format(getattr(row, c)) for c in GAP_COLUMNS]
    values += [row.raw_graph_path or "", row.clustered_graph_path or ""]
    return values


def write_manifest(rows: list[ManifestRow], path: str | Path) -> None:
    """Write rows sorted by (design, placement, variant); RFC-4180 CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(MANIFEST_COLUMNS)
    for row in sorted(rows, key=ManifestRow.sort_key):
        writer.writerow(_row_values(row))
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def _parse_row(record: dict[str, str], lineno: int) -> ManifestRow:
    def opt_float(name: str) -> float | None:
        raw = record[name]
        return float(raw) if raw != "" else None

    try:
        placement = PlacementKnobs(
            synth_strategy=record["synth_strategy"],
            aspect_ratio=float(record["aspect_ratio"]),
            io_mode=int(record["io_mode"]),
            core_utilization=float(record["core_utilization"]),
            target_density=float(record["target_density"]),
            time_driven=int(record["time_driven"]),
            routability_driven=int(record["routability_driven"]),
        )
        cts = CtsKnobs(**{c: int(record[c]) for c in CTS_KNOB_COLUMNS})
        qor = QorRecord(**{
            c: (int(record[c]) if c in QOR_COUNT_FIELDS else float(record[c]))
            for c in QOR_FIELDS
        })
        return ManifestRow(
            design_name=record["design_name"],
            placement_id=record["placement_id"],
            cts_variant_id=record["cts_variant_id"],
            placement=placement,
            cts=cts,
            qor=qor,
            g_skew=opt_float("g_skew"),
            g_power=opt_float("g_power"),
            g_wl=opt_float("g_wl"),
            pareto_distance=opt_float("pareto_distance"),
            raw_graph_path=record["raw_graph_path"] or None,
            clustered_graph_path=record["clustered_graph_path"] or None,
        )
    except (KeyError, ValueError) as e:
        raise CtsBenchError(f"manifest row {lineno}: {e}") from e


def read_manifest(path: str | Path) -> list[ManifestRow]:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CtsBenchError("manifest is empty") from None
    if tuple(header) != MANIFEST_COLUMNS:
        raise CtsBenchError(f"manifest header mismatch: {header}")
    rows = []
    for lineno, values in enumerate(reader, start=2):
        if not values:
            continue
        if len(values) != len(MANIFEST_COLUMNS):
            raise CtsBenchError(f"manifest row {lineno}: expected {len(MANIFEST_COLUMNS)} columns")
        rows.append(_parse_row(dict(zip(MANIFEST_COLUMNS, values)), lineno))
    return rows


def design_groups(rows: list[ManifestRow]) -> dict[str, DesignGroup]:
    """Group rows into per-design scoring universes keyed by design name."""
    by_design: dict[str, list[tuple[str, QorRecord]]] = {}
    for row in sorted(rows, key=ManifestRow.sort_key):
        by_design.setdefault(row.design_name, []).append((row.run_id, row.qor))
    return {name: DesignGroup(name, tuple(runs)) for name, runs in by_design.items()}


def fill_gap_columns(rows: list[ManifestRow], skew_metric: str = "setup") -> list[ManifestRow]:
    """Recompute the four gap columns for every row; pure and idempotent."""
    groups = design_groups(rows)
    out = []
    for row in rows:
        g = gap_vector(row.qor, groups[row.design_name], skew_metric)
        out.append(replace(
            row,
            g_skew=g.g_skew,
            g_power=g.g_power,
            g_wl=g.g_wl,
            pareto_distance=pareto_distance(g),
        ))
    return out


def assemble_manifest(
    corpus_dir: str | Path,
    rows: list[ManifestRow],
    out_path: str | Path | None = None,
    skew_metric: str = "setup",
) -> Path:
    """Audit and write the final manifest.

    Every graph path must resolve (relative to the corpus dir) to a parseable
    archive, and the stored gap columns must equal recomputation from the QoR
    columns within 1e-9; violations raise instead of writing.
    """
    corpus_dir = Path(corpus_dir)
    groups = design_groups(rows)
    for row in rows:
        for path in (row.raw_graph_path, row.clustered_graph_path):
            if path is None:
                raise MissingArtifactError(f"<unset graph path for {row.design_name}/{row.run_id}>")
            full = corpus_dir / path
            if not full.is_file():
                raise MissingArtifactError(str(full))
            read_archive(full)

        g = gap_vector(row.qor, groups[row.design_name], skew_metric)
        expected = (g.g_skew, g.g_power, g.g_wl, pareto_distance(g))
        stored = (row.g_skew, row.g_power, row.g_wl, row.pareto_distance)
        for name, want, got in zip(GAP_COLUMNS, expected, stored):
            if got is None or not math.isfinite(got) or abs(got - want) > GAP_TOLERANCE:
                raise InconsistentGapError(
                    f"{row.design_name}/{row.run_id}: {name} stored={got} recomputed={want}"
                )

    target = Path(out_path) if out_path is not None else corpus_dir / "manifest.csv"
    write_manifest(rows, target)
    return target
