"""Acceptance: loader bit-exactness and the fusion training smoke test."""

import csv
import struct

from ctsbench_loader.dataset import load_dataset
from ctsbench_loader.model import collate, smoke_train, spec_for, FusionRegressor


def _criterion(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    print(line)
    assert ok, line


def test_loader_bit_exactness(reference_manifest):
    mismatches = 0
    checked = 0
    for kind in ("raw", "clustered"):
        samples = load_dataset(reference_manifest, kind)
        with open(reference_manifest, newline="") as f:
            rows = list(csv.DictReader(f))
        for sample, row in zip(samples, rows):
            blob = (reference_manifest.parent / row[f"{kind}_graph_path"]).read_bytes()
            (hl,) = struct.unpack_from("<I", blob, 0)
            payload = blob[4 + hl:]
            rebuilt = (
                sample.node_features.numpy().tobytes()
                + sample.edge_index.numpy().tobytes()
                + sample.edge_weights.numpy().tobytes()
            )
            checked += 1
            if rebuilt != payload:
                mismatches += 1
    _criterion(
        "loader bit-exactness (tensors byte-match archive payloads)",
        checked == 72 and mismatches == 0,
        f"{checked} archives checked, {mismatches} mismatches",
    )


def test_fusion_smoke(reference_manifest):
    ok = True
    details = []
    for kind in ("raw", "clustered"):
        samples = load_dataset(reference_manifest, kind)
        spec = spec_for(kind)
        model = FusionRegressor(samples[0].node_features.shape[1], spec)
        out = model(collate(samples[:8]))
        shape_ok = out.shape == (8, 3)

        curve = smoke_train(samples, spec, epochs=30, seed=7)
        descent_ok = curve[-1] < curve[0]
        early_ok = all(curve[i + 1] < curve[i] for i in range(4))
        ok &= shape_ok and descent_ok and early_ok
        details.append(
            f"{kind}: shape={'ok' if shape_ok else 'BAD'} "
            f"loss {curve[0]:.4f}->{curve[-1]:.4f} "
            f"(first5 {'strictly down' if early_ok else 'NOT monotone'})"
        )
    _criterion(
        "fusion smoke test (both kinds construct, (batch, 3) output, loss decreases)",
        bool(ok),
        "; ".join(details),
    )
