"""Load graph archives and manifest rows into training-ready tensors.

This module is an independent consumer of the published file formats; it does
not import the producer package. The ``.ctsg`` archive layout it decodes::

    uint32  header_len (little-endian)
    bytes   header JSON {schema_version, design_name, graph_kind, node_count,
                         edge_count, feature_dim, seed, config}
    float32 node_features  row-major node_count x feature_dim
    int64   edge_index     2 x edge_count (source row, then target row)
    float32 edge_weights   edge_count

Knob vectors follow the manifest column order: placement knobs are a 7-vector
(synthesis strategy as a categorical index, aspect ratio, IO mode, core
utilization, target density, time-driven flag, routability-driven flag) and
CTS knobs a 4-vector; labels are the three regression targets (setup skew,
total power, wirelength).
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

SYNTH_STRATEGIES = (
    "AREA0", "AREA1", "AREA2", "DELAY0", "DELAY1", "DELAY2", "DELAY3", "DELAY4",
)
PLACEMENT_KNOB_COLUMNS = (
    "synth_strategy", "aspect_ratio", "io_mode", "core_utilization",
    "target_density", "time_driven", "routability_driven",
)
CTS_KNOB_COLUMNS = ("sink_max_dia", "max_wire_length", "cluster_size", "buffer_distance")
LABEL_COLUMNS = ("skew_setup", "total_power", "wirelength")
GRAPH_KINDS = {"raw": 4, "clustered": 10}


class FormatError(Exception):
    """An archive or manifest violates the published format."""


@dataclass(frozen=True)
class GraphPayload:
    """Raw decoded archive: header plus the three payload arrays."""

    header: dict
    node_features: np.ndarray
    edge_index: np.ndarray
    edge_weights: np.ndarray


def read_graph_archive(path: str | Path) -> GraphPayload:
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise FormatError(f"{path}: shorter than the header length field")
    (header_len,) = struct.unpack_from("<I", blob, 0)
    if len(blob) < 4 + header_len:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[4 : 4 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: bad header JSON ({e})") from e

    kind = header.get("graph_kind")
    if kind not in GRAPH_KINDS:
        raise FormatError(f"{path}: unknown graph_kind {kind!r}")
    n = header.get("node_count")
    e = header.get("edge_count")
    d = header.get("feature_dim")
    if d != GRAPH_KINDS[kind]:
        raise FormatError(f"{path}: feature_dim {d} does not match kind {kind!r}")
    expected = 4 + header_len + n * d * 4 + 2 * e * 8 + e * 4
    if len(blob) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(blob)}")

    offset = 4 + header_len
    features = np.frombuffer(blob, "<f4", n * d, offset).reshape(n, d)
    offset += n * d * 4
    edge_index = np.frombuffer(blob, "<i8", 2 * e, offset).reshape(2, e)
    offset += 2 * e * 8
    weights = np.frombuffer(blob, "<f4", e, offset)
    if e and (edge_index.min() < 0 or edge_index.max() >= n):
        raise FormatError(f"{path}: edge indices out of range")
    return GraphPayload(header, features, edge_index, weights)


@dataclass(frozen=True)
class LoadedSample:
    design_name: str
    run_id: str
    node_features: torch.Tensor   # float32 (nodes, feature_dim)
    edge_index: torch.Tensor      # int64   (2, edges)
    edge_weights: torch.Tensor    # float32 (edges,)
    placement_knobs: torch.Tensor  # float32 (7,)
    cts_knobs: torch.Tensor        # float32 (4,)
    labels: torch.Tensor           # float32 (3,)


def _knob_vector(record: dict[str, str]) -> torch.Tensor:
    strategy = record["synth_strategy"]
    if strategy not in SYNTH_STRATEGIES:
        raise FormatError(f"unknown synth_strategy {strategy!r}")
    values = [float(SYNTH_STRATEGIES.index(strategy))]
    values += [float(record[c]) for c in PLACEMENT_KNOB_COLUMNS[1:]]
    return torch.tensor(values, dtype=torch.float32)


def load_dataset(manifest_path: str | Path, kind: str) -> list[LoadedSample]:
    """One sample per manifest row, tensors bit-exact against archive bytes."""
    if kind not in GRAPH_KINDS:
        raise ValueError(f"kind must be 'raw' or 'clustered', got {kind!r}")
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    path_column = f"{kind}_graph_path"

    with open(manifest_path, newline="", encoding="utf-8") as f:
        records = list(csv.DictReader(f))
    if not records:
        raise FormatError(f"{manifest_path}: no rows")

    cache: dict[str, GraphPayload] = {}
    samples = []
    for record in records:
        rel = record.get(path_column)
        if not rel:
            raise FormatError(f"{manifest_path}: row missing {path_column}")
        if rel not in cache:
            cache[rel] = read_graph_archive(root / rel)
        payload = cache[rel]
        if not np.isfinite([float(record[c]) for c in LABEL_COLUMNS]).all():
            raise FormatError(f"non-finite label in row {record['design_name']}")
        samples.append(LoadedSample(
            design_name=record["design_name"],
            run_id=f"{record['placement_id']}/{record['cts_variant_id']}",
            node_features=torch.from_numpy(payload.node_features.copy()),
            edge_index=torch.from_numpy(payload.edge_index.copy()),
            edge_weights=torch.from_numpy(payload.edge_weights.copy()),
            placement_knobs=_knob_vector(record),
            cts_knobs=torch.tensor([float(record[c]) for c in CTS_KNOB_COLUMNS],
                                   dtype=torch.float32),
            labels=torch.tensor([float(record[c]) for c in LABEL_COLUMNS],
                                dtype=torch.float32),
        ))
    return samples
