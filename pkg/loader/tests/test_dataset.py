"""Dataset loader: counts, bit-exactness, order independence, guards."""

import csv
import io
import struct

import pytest
import torch

from ctsbench_loader.dataset import (
    FormatError,
    SYNTH_STRATEGIES,
    load_dataset,
    read_graph_archive,
)


def test_one_sample_per_row(reference_manifest):
    for kind in ("raw", "clustered"):
        samples = load_dataset(reference_manifest, kind)
        assert len(samples) == 36  # 3 designs x 3 placements x 4 variants
        dim = 4 if kind == "raw" else 10
        for s in samples:
            assert s.node_features.shape[1] == dim
            assert s.edge_index.shape[0] == 2
            assert s.edge_weights.shape[0] == s.edge_index.shape[1]
            assert s.placement_knobs.shape == (7,)
            assert s.cts_knobs.shape == (4,)
            assert s.labels.shape == (3,)
            assert torch.isfinite(s.labels).all()


def _payload_slices(path):
    blob = path.read_bytes()
    (hl,) = struct.unpack_from("<I", blob, 0)
    import json
    header = json.loads(blob[4 : 4 + hl])
    n, e, d = header["node_count"], header["edge_count"], header["feature_dim"]
    o = 4 + hl
    return (
        blob[o : o + n * d * 4],
        blob[o + n * d * 4 : o + n * d * 4 + 2 * e * 8],
        blob[o + n * d * 4 + 2 * e * 8 :],
    )


def test_tensors_byte_match_archive_payloads(reference_manifest):
    for kind in ("raw", "clustered"):
        samples = load_dataset(reference_manifest, kind)
        with open(reference_manifest, newline="") as f:
            rows = list(csv.DictReader(f))
        for sample, row in zip(samples, rows):
            archive = reference_manifest.parent / row[f"{kind}_graph_path"]
            feat_bytes, edge_bytes, weight_bytes = _payload_slices(archive)
            assert sample.node_features.numpy().tobytes() == feat_bytes
            assert sample.edge_index.numpy().tobytes() == edge_bytes
            assert sample.edge_weights.numpy().tobytes() == weight_bytes


def _sample_key(s):
    return (
        s.design_name,
        s.run_id,
        s.node_features.numpy().tobytes(),
        s.edge_index.numpy().tobytes(),
        s.labels.numpy().tobytes(),
    )


def test_shuffled_manifest_loads_equal_multiset(reference_manifest, tmp_path):
    ordered = load_dataset(reference_manifest, "clustered")
    with open(reference_manifest, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    rows = rows[::-1]
    rows = rows[len(rows) // 3:] + rows[: len(rows) // 3]
    shuffled_path = tmp_path / "shuffled.csv"
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    shuffled_path.write_text(buf.getvalue())
    # Archives live next to the original manifest; keep paths resolvable.
    for entry in (reference_manifest.parent).iterdir():
        if entry.is_dir():
            (tmp_path / entry.name).symlink_to(entry)
    shuffled = load_dataset(shuffled_path, "clustered")
    assert sorted(map(_sample_key, shuffled)) == sorted(map(_sample_key, ordered))


def test_strategy_encoding(reference_manifest):
    samples = load_dataset(reference_manifest, "raw")
    for s in samples:
        idx = int(s.placement_knobs[0].item())
        assert 0 <= idx < len(SYNTH_STRATEGIES)
        assert s.placement_knobs[0] == float(idx)


def test_truncated_archive_rejected(reference_manifest, tmp_path):
    with open(reference_manifest, newline="") as f:
        row = next(csv.DictReader(f))
    src = reference_manifest.parent / row["raw_graph_path"]
    bad = tmp_path / "bad.ctsg"
    bad.write_bytes(src.read_bytes()[:-5])
    with pytest.raises(FormatError):
        read_graph_archive(bad)


def test_unknown_kind_rejected(reference_manifest):
    with pytest.raises(ValueError):
        load_dataset(reference_manifest, "hybrid")
