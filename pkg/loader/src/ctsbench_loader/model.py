"""Multi-modal fusion regressor and the training smoke harness.

Topology: a GCN backbone over the graph, global mean pooling, two separate
two-layer knob MLPs (placement and CTS branches), concatenation of the three
embeddings, and a fully connected head predicting the three targets (setup
skew, total power, wirelength). Branch depth and activations are pinned to
2-layer MLPs with ReLU. Convolution uses the symmetric-normalized adjacency
with self-loops; archive edge weights ride along in the samples but do not
enter the normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .dataset import LoadedSample


class ShapeError(Exception):
    """Sample feature dimensions disagree with each other or with the model."""


@dataclass(frozen=True)
class FusionSpec:
    """Hyper-parameters per graph kind."""

    backbone: str = "gcn"
    graph_hidden: int = 64
    learning_rate: float = 1e-3
    placement_dim: int = 32
    cts_dim: int = 16

    def __post_init__(self) -> None:
        if self.backbone != "gcn":
            raise ValueError(f"unsupported backbone {self.backbone!r}")
        for name in ("graph_hidden", "placement_dim", "cts_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


RAW_SPEC = FusionSpec("gcn", 64, 1e-3, 32, 16)
CLUSTERED_SPEC = FusionSpec("gcn", 16, 5e-4, 8, 4)


def spec_for(kind: str) -> FusionSpec:
    if kind == "raw":
        return RAW_SPEC
    if kind == "clustered":
        return CLUSTERED_SPEC
    raise ValueError(f"kind must be 'raw' or 'clustered', got {kind!r}")


@dataclass
class GraphBatch:
    x: torch.Tensor           # (total_nodes, feature_dim)
    edge_index: torch.Tensor  # (2, total_edges), node indices offset per graph
    batch: torch.Tensor       # (total_nodes,) graph id per node
    placement: torch.Tensor   # (graphs, 7)
    cts: torch.Tensor         # (graphs, 4)
    y: torch.Tensor           # (graphs, 3)

    @property
    def num_graphs(self) -> int:
        return self.y.shape[0]


def collate(samples: list[LoadedSample]) -> GraphBatch:
    """Block-diagonal batching: concatenate nodes, offset edge indices."""
    dims = {s.node_features.shape[1] for s in samples}
    if len(dims) != 1:
        raise ShapeError(f"inconsistent node feature dims in batch: {sorted(dims)}")
    xs, edges, batch_ids = [], [], []
    offset = 0
    for gid, s in enumerate(samples):
        n = s.node_features.shape[0]
        xs.append(s.node_features)
        edges.append(s.edge_index + offset)
        batch_ids.append(torch.full((n,), gid, dtype=torch.long))
        offset += n
    return GraphBatch(
        x=torch.cat(xs, dim=0),
        edge_index=torch.cat(edges, dim=1),
        batch=torch.cat(batch_ids),
        placement=torch.stack([s.placement_knobs for s in samples]),
        cts=torch.stack([s.cts_knobs for s in samples]),
        y=torch.stack([s.labels for s in samples]),
    )


class GraphConv(nn.Module):
    """GCN layer: X' = D^-1/2 (A + I) D^-1/2 X W over an undirected edge list."""

    def __init__(self, in_dim: int, out_dim: int) -> None:
        super().__init__()
        self.linear = nn.Linear(in_dim, out_dim)

    def forward(self, x: torch.Tensor, edge_index: torch.Tensor) -> torch.Tensor:
        n = x.shape[0]
        loops = torch.arange(n, dtype=torch.long)
        src = torch.cat([edge_index[0], edge_index[1], loops])
        dst = torch.cat([edge_index[1], edge_index[0], loops])
        degree = torch.zeros(n).index_add_(0, dst, torch.ones_like(dst, dtype=torch.float32))
        coeff = degree.clamp(min=1.0).rsqrt()
        messages = self.linear(x)[src] * (coeff[src] * coeff[dst]).unsqueeze(1)
        out = torch.zeros(n, messages.shape[1])
        return out.index_add_(0, dst, messages)


def global_mean_pool(x: torch.Tensor, batch: torch.Tensor, num_graphs: int) -> torch.Tensor:
    sums = torch.zeros(num_graphs, x.shape[1]).index_add_(0, batch, x)
    counts = torch.zeros(num_graphs).index_add_(0, batch, torch.ones_like(batch, dtype=torch.float32))
    return sums / counts.clamp(min=1.0).unsqueeze(1)


def _branch(in_dim: int, out_dim: int) -> nn.Sequential:
    return nn.Sequential(nn.Linear(in_dim, out_dim), nn.ReLU(),
                         nn.Linear(out_dim, out_dim), nn.ReLU())


class FusionRegressor(nn.Module):
    """Backbone -> mean pool -> knob branches -> concatenation -> head (3 targets)."""

    def __init__(self, node_dim: int, spec: FusionSpec) -> None:
        super().__init__()
        self.node_dim = node_dim
        self.conv1 = GraphConv(node_dim, spec.graph_hidden)
        self.conv2 = GraphConv(spec.graph_hidden, spec.graph_hidden)
        self.placement_branch = _branch(7, spec.placement_dim)
        self.cts_branch = _branch(4, spec.cts_dim)
        fused = spec.graph_hidden + spec.placement_dim + spec.cts_dim
        self.head = nn.Sequential(nn.Linear(fused, fused), nn.ReLU(), nn.Linear(fused, 3))

    def forward(self, batch: GraphBatch) -> torch.Tensor:
        if batch.x.shape[1] != self.node_dim:
            raise ShapeError(
                f"model expects {self.node_dim}-dim node features, got {batch.x.shape[1]}"
            )
        h = torch.relu(self.conv1(batch.x, batch.edge_index))
        h = torch.relu(self.conv2(h, batch.edge_index))
        graph_embed = global_mean_pool(h, batch.batch, batch.num_graphs)
        fused = torch.cat(
            [graph_embed, self.placement_branch(batch.placement), self.cts_branch(batch.cts)],
            dim=1,
        )
        return self.head(fused)


def _stats(rows: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    return rows.mean(dim=0), rows.std(dim=0).clamp(min=1e-8)


def smoke_train(
    samples: list[LoadedSample],
    spec: FusionSpec,
    epochs: int = 30,
    batch_size: int = 32,
    seed: int = 0,
) -> list[float]:
    """Train on standardized inputs and return the per-epoch mean loss.

    Deterministic given (samples, spec, epochs, batch_size, seed): the batch
    split is drawn once from a seeded generator and reused every epoch.
    """
    if len(samples) < 8:
        raise ValueError("smoke training needs at least 8 samples")
    dims = {s.node_features.shape[1] for s in samples}
    if len(dims) != 1:
        raise ShapeError(f"samples mix feature dims: {sorted(dims)}")

    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed)
    order = torch.randperm(len(samples), generator=generator).tolist()

    placement_mean, placement_std = _stats(torch.stack([s.placement_knobs for s in samples]))
    cts_mean, cts_std = _stats(torch.stack([s.cts_knobs for s in samples]))
    label_mean, label_std = _stats(torch.stack([s.labels for s in samples]))

    batches = []
    for start in range(0, len(samples), batch_size):
        chunk = [samples[i] for i in order[start : start + batch_size]]
        batch = collate(chunk)
        batch.placement = (batch.placement - placement_mean) / placement_std
        batch.cts = (batch.cts - cts_mean) / cts_std
        batches.append(batch)

    model = FusionRegressor(dims.pop(), spec)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    loss_fn = nn.MSELoss()
    curve = []
    for _ in range(epochs):
        total = 0.0
        for batch in batches:
            optimizer.zero_grad()
            prediction = model(batch)
            loss = loss_fn(prediction, (batch.y - label_mean) / label_std)
            loss.backward()
            optimizer.step()
            total += loss.item() * batch.num_graphs
        curve.append(total / len(samples))
    return curve
