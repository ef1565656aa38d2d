"""Session fixtures: build the reference corpus through the producer CLI.

The producer is invoked only through its public command line; nothing in the
loader package or its tests imports the producer's modules.
"""

from __future__ import annotations

import subprocess
import sys

import pytest

REFERENCE_FLAGS = [
    "--designs", "3", "--placements", "3", "--cts", "4",
    "--cells", "220:420", "--ff-fraction", "0.16:0.28",
    "--seed", "20260811", "--jobs", "1", "--repetitions", "1",
]


@pytest.fixture(scope="session")
def reference_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("reference") / "run"
    cmd = [sys.executable, "-m", "ctsbench.cli", "pipeline",
           *REFERENCE_FLAGS, "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"producer pipeline failed:\n{proc.stderr}")
    return out / "corpus"


@pytest.fixture(scope="session")
def reference_manifest(reference_corpus):
    return reference_corpus / "manifest.csv"
