"""Randomization knobs for placement and CTS variants, with seeded sampling.

The ranges mirror the knob table the corpus is diversified over: synthesis
strategy, floorplan aspect ratio and IO mode, placement utilization/density
and driven modes, plus four CTS tuning integers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rng import SplitMix64

SYNTH_STRATEGIES: tuple[str, ...] = (
    "AREA0", "AREA1", "AREA2", "DELAY0", "DELAY1", "DELAY2", "DELAY3", "DELAY4",
)
ASPECT_RATIOS: tuple[float, ...] = (0.7, 1.0, 1.4, 2.0)

UTILIZATION_RANGE = (40.0, 70.0)
DENSITY_OFFSET_RANGE = (0.0, 0.20)
SINK_MAX_DIA_RANGE = (35, 70)        # um
MAX_WIRE_LENGTH_RANGE = (130, 280)   # um
CLUSTER_SIZE_RANGE = (12, 30)        # sinks
BUFFER_DISTANCE_RANGE = (70, 150)    # um


@dataclass(frozen=True)
class PlacementKnobs:
    synth_strategy: str
    aspect_ratio: float
    io_mode: int
    core_utilization: float  # percent
    target_density: float    # fraction = utilization/100 + offset
    time_driven: int
    routability_driven: int

    def __post_init__(self) -> None:
        if self.synth_strategy not in SYNTH_STRATEGIES:
            raise ValueError(f"unknown synth_strategy {self.synth_strategy!r}")
        if self.aspect_ratio not in ASPECT_RATIOS:
            raise ValueError(f"aspect_ratio must be one of {ASPECT_RATIOS}")
        for flag in ("io_mode", "time_driven", "routability_driven"):
            if getattr(self, flag) not in (0, 1):
                raise ValueError(f"{flag} must be 0 or 1")
        lo, hi = UTILIZATION_RANGE
        if not (lo <= self.core_utilization <= hi):
            raise ValueError(f"core_utilization must lie in [{lo}, {hi}]")
        offset = self.target_density - self.core_utilization / 100.0
        olo, ohi = DENSITY_OFFSET_RANGE
        if not (olo - 1e-12 <= offset <= ohi + 1e-12):
            raise ValueError("target_density must equal utilization/100 plus [0.0, 0.20]")

    @property
    def strategy_index(self) -> int:
        return SYNTH_STRATEGIES.index(self.synth_strategy)


@dataclass(frozen=True)
class CtsKnobs:
    sink_max_dia: int      # um
    max_wire_length: int   # um
    cluster_size: int      # sinks
    buffer_distance: int   # um

    def __post_init__(self) -> None:
        for name, (lo, hi) in (
            ("sink_max_dia", SINK_MAX_DIA_RANGE),
            ("max_wire_length", MAX_WIRE_LENGTH_RANGE),
            ("cluster_size", CLUSTER_SIZE_RANGE),
            ("buffer_distance", BUFFER_DISTANCE_RANGE),
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"{name} must be an integer")
            if not (lo <= value <= hi):
                raise ValueError(f"{name} must lie in [{lo}, {hi}]")


def sample_placement_knobs(rng: SplitMix64) -> PlacementKnobs:
    utilization = rng.uniform_in(*UTILIZATION_RANGE)
    return PlacementKnobs(
        synth_strategy=rng.choice(SYNTH_STRATEGIES),
        aspect_ratio=rng.choice(ASPECT_RATIOS),
        io_mode=rng.below(2),
        core_utilization=utilization,
        target_density=utilization / 100.0 + rng.uniform_in(*DENSITY_OFFSET_RANGE),
        time_driven=rng.below(2),
        routability_driven=rng.below(2),
    )


def sample_cts_knobs(rng: SplitMix64) -> CtsKnobs:
    return CtsKnobs(
        sink_max_dia=rng.int_in(*SINK_MAX_DIA_RANGE),
        max_wire_length=rng.int_in(*MAX_WIRE_LENGTH_RANGE),
        cluster_size=rng.int_in(*CLUSTER_SIZE_RANGE),
        buffer_distance=rng.int_in(*BUFFER_DISTANCE_RANGE),
    )


def sample_knobs(rng: SplitMix64) -> tuple[PlacementKnobs, CtsKnobs]:
    """One uniform draw of every knob, deterministic per stream position."""
    return sample_placement_knobs(rng), sample_cts_knobs(rng)
