"""QoR label schema and normalized Pareto-gap scoring.

Each run of a design is normalized against the best value any run of that
design achieved on three axes (clock skew, total power, wirelength), giving a
gap vector of ratios >= 1; its Euclidean distance from the ideal [1, 1, 1]
anchor is the scalar used for ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import CtsBenchError


class NonPositiveMinError(CtsBenchError):
    """A group minimum is <= 0, making ratio normalization meaningless."""

    def __init__(self, metric: str, value: float, design: str | None = None) -> None:
        self.metric = metric
        self.value = value
        self.design = design
        where = f" in design {design!r}" if design else ""
        super().__init__(f"group minimum of {metric}{where} is {value}, must be > 0")


@dataclass(frozen=True)
class QorRecord:
    """The 15 post-CTS ground-truth labels of one run."""

    skew_setup: float          # ns
    skew_hold: float           # ns
    worst_slack_setup: float   # ns, may be negative
    worst_slack_hold: float    # ns, may be negative
    tns_setup: float           # ns, may be negative
    tns_hold: float            # ns, may be negative
    total_power: float         # W
    dynamic_power: float       # W
    static_power: float        # W
    wirelength: float          # um
    cell_utilization: float    # percent
    clock_buffers: int
    clock_inverters: int
    routing_buffers: int
    repair_buffers: int

    def __post_init__(self) -> None:
        for name in ("total_power", "dynamic_power", "static_power", "wirelength"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 <= self.cell_utilization <= 100.0):
            raise ValueError("cell_utilization must lie in [0, 100]")
        for name in ("clock_buffers", "clock_inverters", "routing_buffers", "repair_buffers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer")


QOR_FIELDS: tuple[str, ...] = tuple(f.name for f in fields(QorRecord))
QOR_COUNT_FIELDS: tuple[str, ...] = (
    "clock_buffers", "clock_inverters", "routing_buffers", "repair_buffers"
)


@dataclass(frozen=True)
class GapVector:
    g_skew: float
    g_power: float
    g_wl: float


@dataclass(frozen=True)
class DesignGroup:
    """All runs of one design; the normalization universe for gap scoring."""

    design_name: str
    runs: tuple[tuple[str, QorRecord], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "runs", tuple(self.runs))
        if not self.runs:
            raise ValueError("a design group must contain at least one run")
        ids = [run_id for run_id, _ in self.runs]
        if len(set(ids)) != len(ids):
            raise ValueError("run ids must be unique within a group")


def _skew_field(skew_metric: str) -> str:
    if skew_metric == "setup":
        return "skew_setup"
    if skew_metric == "hold":
        return "skew_hold"
    raise ValueError(f"skew_metric must be 'setup' or 'hold', got {skew_metric!r}")


def group_minima(group: DesignGroup, skew_metric: str = "setup") -> tuple[float, float, float]:
    """Per-axis group minima (skew, power, wirelength); all must be > 0."""
    skew_name = _skew_field(skew_metric)
    min_skew = min(getattr(q, skew_name) for _, q in group.runs)
    min_power = min(q.total_power for _, q in group.runs)
    min_wl = min(q.wirelength for _, q in group.runs)
    for name, value in ((skew_name, min_skew), ("total_power", min_power), ("wirelength", min_wl)):
        if value <= 0:
            raise NonPositiveMinError(name, value, design=group.design_name)
    return min_skew, min_power, min_wl


def gap_vector(run: QorRecord, group: DesignGroup, skew_metric: str = "setup") -> GapVector:
    """Componentwise ratio of the run against its group's minima."""
    min_skew, min_power, min_wl = group_minima(group, skew_metric)
    return GapVector(
        g_skew=getattr(run, _skew_field(skew_metric)) / min_skew,
        g_power=run.total_power / min_power,
        g_wl=run.wirelength / min_wl,
    )


def pareto_distance(g: GapVector) -> float:
    """Euclidean distance from the ideal [1, 1, 1] anchor."""
    return math.sqrt((g.g_skew - 1.0) ** 2 + (g.g_power - 1.0) ** 2 + (g.g_wl - 1.0) ** 2)


@dataclass(frozen=True)
class ScoredRun:
    run_id: str
    gap: GapVector
    distance: float


def score_group(group: DesignGroup, skew_metric: str = "setup") -> list[ScoredRun]:
    """Score every run and rank ascending by distance, ties broken by run id."""
    minima = group_minima(group, skew_metric)
    min_skew, min_power, min_wl = minima
    skew_name = _skew_field(skew_metric)
    scored = []
    for run_id, q in group.runs:
        g = GapVector(
            g_skew=getattr(q, skew_name) / min_skew,
            g_power=q.total_power / min_power,
            g_wl=q.wirelength / min_wl,
        )
        scored.append(ScoredRun(run_id, g, pareto_distance(g)))
    scored.sort(key=lambda s: (s.distance, s.run_id))
    return scored
