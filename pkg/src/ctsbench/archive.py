"""Self-describing binary graph archive (``.ctsg``).

Layout (all little-endian)::

    uint32  header_len
    bytes   header JSON (UTF-8, canonical: sorted keys, compact separators)
    float32 node_features   row-major, node_count x feature_dim
    int64   edge_index      2 x edge_count (source row, then target row)
    float32 edge_weights    edge_count

The header declares schema_version, design_name, graph_kind (raw|clustered),
node_count, edge_count, feature_dim (4 for raw, 10 for clustered), seed, and a
config echo. Counts must match payload byte lengths exactly; writes are
byte-deterministic for equal graphs.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coarsen import ClusteredGraph
from .errors import CtsBenchError
from .rawgraph import RawGraph

SCHEMA_VERSION = 1
FEATURE_DIMS = {"raw": 4, "clustered": 10}


class FormatError(CtsBenchError):
    """An archive violates the declared layout."""

    def __init__(self, section: str, expected, actual) -> None:
        self.section = section
        self.expected = expected
        self.actual = actual
        super().__init__(f"archive {section}: expected {expected}, got {actual}")


@dataclass(frozen=True)
class LoadedArchive:
    """Header plus the three payload tensors of one archive."""

    header: dict
    node_features: np.ndarray  # float32 (node_count, feature_dim)
    edge_index: np.ndarray     # int64   (2, edge_count)
    edge_weights: np.ndarray   # float32 (edge_count,)

    @property
    def graph_kind(self) -> str:
        return self.header["graph_kind"]

    @property
    def design_name(self) -> str:
        return self.header["design_name"]


def _graph_parts(g: RawGraph | ClusteredGraph):
    if isinstance(g, RawGraph):
        kind, seed, config = "raw", 0, {"hops": g.hops}
    elif isinstance(g, ClusteredGraph):
        kind = "clustered"
        seed = g.config.seed
        config = {
            "spread_threshold": g.config.spread_threshold,
            "merge_distance": g.config.merge_distance,
            "cos_threshold": g.config.cos_threshold,
        }
    else:
        raise TypeError(f"cannot archive {type(g).__name__}")
    return kind, seed, config


def archive_bytes(g: RawGraph | ClusteredGraph) -> bytes:
    """Serialize a graph to archive bytes (deterministic)."""
    kind, seed, config = _graph_parts(g)
    features = g.feature_matrix()
    edge_index = g.edge_index_array()
    weights = g.edge_weight_array()
    header = {
        "schema_version": SCHEMA_VERSION,
        "design_name": g.design_name,
        "graph_kind": kind,
        "node_count": int(features.shape[0]),
        "edge_count": int(edge_index.shape[1]),
        "feature_dim": int(features.shape[1]),
        "seed": seed,
        "config": config,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out = io.BytesIO()
    out.write(struct.pack("<I", len(header_bytes)))
    out.write(header_bytes)
    out.write(np.ascontiguousarray(features, dtype="<f4").tobytes())
    out.write(np.ascontiguousarray(edge_index, dtype="<i8").tobytes())
    out.write(np.ascontiguousarray(weights, dtype="<f4").tobytes())
    return out.getvalue()


def write_archive(g: RawGraph | ClusteredGraph, path: str | Path) -> None:
    Path(path).write_bytes(archive_bytes(g))


def read_archive_bytes(blob: bytes) -> LoadedArchive:
    """Decode archive bytes, validating header-vs-payload consistency."""
    if len(blob) < 4:
        raise FormatError("header-length", "4 bytes", f"{len(blob)} bytes")
    (header_len,) = struct.unpack_from("<I", blob, 0)
    if len(blob) < 4 + header_len:
        raise FormatError("header", f"{header_len} bytes", f"{len(blob) - 4} bytes")
    try:
        header = json.loads(blob[4 : 4 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError("header", "valid JSON", str(e)) from e
    if not isinstance(header, dict):
        raise FormatError("header", "JSON object", type(header).__name__)

    for key in ("schema_version", "design_name", "graph_kind", "node_count",
                "edge_count", "feature_dim", "seed", "config"):
        if key not in header:
            raise FormatError("header", f"key {key!r}", "missing")
    if header["schema_version"] != SCHEMA_VERSION:
        raise FormatError("schema_version", SCHEMA_VERSION, header["schema_version"])
    kind = header["graph_kind"]
    if kind not in FEATURE_DIMS:
        raise FormatError("graph_kind", "raw or clustered", kind)
    node_count = header["node_count"]
    edge_count = header["edge_count"]
    feature_dim = header["feature_dim"]
    for name, value in (("node_count", node_count), ("edge_count", edge_count)):
        if not isinstance(value, int) or value < 0:
            raise FormatError(name, "non-negative integer", value)
    if feature_dim != FEATURE_DIMS[kind]:
        raise FormatError("feature_dim", FEATURE_DIMS[kind], feature_dim)

    nf_bytes = node_count * feature_dim * 4
    ei_bytes = 2 * edge_count * 8
    ew_bytes = edge_count * 4
    expected_len = 4 + header_len + nf_bytes + ei_bytes + ew_bytes
    if len(blob) != expected_len:
        raise FormatError("payload", f"{expected_len} total bytes", f"{len(blob)} bytes")

    offset = 4 + header_len
    features = np.frombuffer(blob, dtype="<f4", count=node_count * feature_dim, offset=offset)
    features = features.reshape(node_count, feature_dim)
    offset += nf_bytes
    edge_index = np.frombuffer(blob, dtype="<i8", count=2 * edge_count, offset=offset)
    edge_index = edge_index.reshape(2, edge_count)
    offset += ei_bytes
    weights = np.frombuffer(blob, dtype="<f4", count=edge_count, offset=offset)

    if edge_count and (edge_index.min() < 0 or edge_index.max() >= node_count):
        raise FormatError("edge_index", f"indices in [0, {node_count})",
                          f"[{edge_index.min()}, {edge_index.max()}]")
    return LoadedArchive(header, features, edge_index, weights)


def read_archive(path: str | Path) -> LoadedArchive:
    return read_archive_bytes(Path(path).read_bytes())
