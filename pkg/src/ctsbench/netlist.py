"""Placed-netlist domain types and the ``.pnl.json`` interchange parser/writer.

The interchange document is a strict UTF-8 JSON object::

    {
      "design_name": "...",
      "die_width": <microns>, "die_height": <microns>,
      "cells": [{"id", "kind": "ff"|"logic", "x", "y", "master",
                 "control_net" (flip-flops only, optional)}, ...],
      "nets":  [{"id", "driver", "sinks": [...]}, ...]
    }

Unknown fields are rejected. Cells and nets are canonicalized to sorted-by-id
order at construction, so structural equality is order-insensitive and the
writer is byte-deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping

from .errors import CtsBenchError


class NetlistSyntaxError(CtsBenchError):
    """Malformed interchange document (bad JSON, schema violation)."""

    def __init__(self, reason: str, line: int | None = None) -> None:
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{reason}{where}")


class NetlistReferenceError(CtsBenchError):
    """A net references a cell id that does not exist."""


class InvariantError(CtsBenchError):
    """A structural invariant of the netlist is violated."""


class CellKind(Enum):
    FLIP_FLOP = "ff"
    LOGIC = "logic"


@dataclass(frozen=True)
class PlacedCell:
    """One placed standard cell; ``control_net`` is the reset/enable domain
    label of a flip-flop (logic cells carry none)."""

    id: str
    kind: CellKind
    x: float
    y: float
    master: str
    control_net: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantError("cell id must be nonempty")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvariantError(f"cell {self.id!r}: coordinates must be finite")
        if self.x < 0 or self.y < 0:
            raise InvariantError(f"cell {self.id!r}: coordinates must be non-negative")
        if self.control_net is not None and self.kind is not CellKind.FLIP_FLOP:
            raise InvariantError(f"cell {self.id!r}: control_net is only valid on flip-flops")

    @property
    def is_ff(self) -> bool:
        return self.kind is CellKind.FLIP_FLOP


@dataclass(frozen=True)
class Net:
    """A driver and its sinks; one physical signal."""

    id: str
    driver: str
    sinks: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantError("net id must be nonempty")
        object.__setattr__(self, "sinks", tuple(self.sinks))
        if not self.sinks:
            raise InvariantError(f"net {self.id!r}: sinks must be nonempty")
        if len(set(self.sinks)) != len(self.sinks):
            raise InvariantError(f"net {self.id!r}: duplicate sinks")
        if self.driver in self.sinks:
            raise InvariantError(f"net {self.id!r}: driver may not appear among sinks")


@dataclass(frozen=True)
class PlacedNetlist:
    """A placed design: die box, cells, and nets, validated and canonicalized."""

    design_name: str
    die_width: float
    die_height: float
    cells: tuple[PlacedCell, ...]
    nets: tuple[Net, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "die_width", float(self.die_width))
        object.__setattr__(self, "die_height", float(self.die_height))
        if not (math.isfinite(self.die_width) and self.die_width > 0):
            raise InvariantError("die_width must be finite and > 0")
        if not (math.isfinite(self.die_height) and self.die_height > 0):
            raise InvariantError("die_height must be finite and > 0")
        cells = tuple(sorted(self.cells, key=lambda c: c.id))
        nets = tuple(sorted(self.nets, key=lambda n: n.id))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "nets", nets)

        ids: set[str] = set()
        has_ff = False
        for cell in cells:
            if cell.id in ids:
                raise InvariantError(f"duplicate cell id {cell.id!r}")
            ids.add(cell.id)
            if cell.x > self.die_width or cell.y > self.die_height:
                raise InvariantError(
                    f"cell {cell.id!r} at ({cell.x}, {cell.y}) lies outside the "
                    f"{self.die_width}x{self.die_height} die"
                )
            has_ff = has_ff or cell.is_ff
        if not has_ff:
            raise InvariantError("netlist has no flip-flops")

        net_ids: set[str] = set()
        for net in nets:
            if net.id in net_ids:
                raise InvariantError(f"duplicate net id {net.id!r}")
            net_ids.add(net.id)
            if net.driver not in ids:
                raise NetlistReferenceError(f"net {net.id!r}: unknown driver cell {net.driver!r}")
            for sink in net.sinks:
                if sink not in ids:
                    raise NetlistReferenceError(f"net {net.id!r}: unknown sink cell {sink!r}")

    @cached_property
    def cell_index(self) -> Mapping[str, PlacedCell]:
        return {c.id: c for c in self.cells}

    @cached_property
    def flip_flops(self) -> tuple[PlacedCell, ...]:
        return tuple(c for c in self.cells if c.is_ff)

    @cached_property
    def nets_by_driver(self) -> Mapping[str, tuple[Net, ...]]:
        by_driver: dict[str, list[Net]] = {}
        for net in self.nets:
            by_driver.setdefault(net.driver, []).append(net)
        return {k: tuple(v) for k, v in by_driver.items()}

    def cell(self, cell_id: str) -> PlacedCell:
        return self.cell_index[cell_id]


def normalize_coords(n: PlacedNetlist) -> dict[str, tuple[float, float]]:
    """Map every cell id to die-relative coordinates in [0, 1] x [0, 1]."""
    w, h = n.die_width, n.die_height
    return {c.id: (c.x / w, c.y / h) for c in n.cells}


_TOP_KEYS = ("design_name", "die_width", "die_height", "cells", "nets")
_CELL_KEYS = {"id", "kind", "x", "y", "master", "control_net"}
_NET_KEYS = {"id", "driver", "sinks"}


def _require_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetlistSyntaxError(f"{what} must be a number, got {type(value).__name__}")
    return float(value)


def _require_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise NetlistSyntaxError(f"{what} must be a string, got {type(value).__name__}")
    return value


def parse_netlist(data: bytes | str) -> PlacedNetlist:
    """Parse an interchange document; rejects rather than repairs bad input."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise NetlistSyntaxError(f"not UTF-8: {e.reason}") from e
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistSyntaxError(e.msg, line=e.lineno) from e

    if not isinstance(doc, dict):
        raise NetlistSyntaxError("top level must be an object")
    unknown = set(doc) - set(_TOP_KEYS)
    if unknown:
        raise NetlistSyntaxError(f"unknown top-level fields: {sorted(unknown)}")
    missing = [k for k in _TOP_KEYS if k not in doc]
    if missing:
        raise NetlistSyntaxError(f"missing top-level fields: {missing}")

    if not isinstance(doc["cells"], list) or not isinstance(doc["nets"], list):
        raise NetlistSyntaxError("cells and nets must be arrays")

    cells = []
    for i, entry in enumerate(doc["cells"]):
        if not isinstance(entry, dict):
            raise NetlistSyntaxError(f"cells[{i}] must be an object")
        unknown = set(entry) - _CELL_KEYS
        if unknown:
            raise NetlistSyntaxError(f"cells[{i}]: unknown fields {sorted(unknown)}")
        kind_str = _require_str(entry.get("kind"), f"cells[{i}].kind")
        try:
            kind = CellKind(kind_str)
        except ValueError:
            raise NetlistSyntaxError(f"cells[{i}].kind must be 'ff' or 'logic', got {kind_str!r}") from None
        control = entry.get("control_net")
        if control is not None:
            control = _require_str(control, f"cells[{i}].control_net")
        cells.append(
            PlacedCell(
                id=_require_str(entry.get("id"), f"cells[{i}].id"),
                kind=kind,
                x=_require_number(entry.get("x"), f"cells[{i}].x"),
                y=_require_number(entry.get("y"), f"cells[{i}].y"),
                master=_require_str(entry.get("master"), f"cells[{i}].master"),
                control_net=control,
            )
        )

    nets = []
    for i, entry in enumerate(doc["nets"]):
        if not isinstance(entry, dict):
            raise NetlistSyntaxError(f"nets[{i}] must be an object")
        unknown = set(entry) - _NET_KEYS
        if unknown:
            raise NetlistSyntaxError(f"nets[{i}]: unknown fields {sorted(unknown)}")
        sinks = entry.get("sinks")
        if not isinstance(sinks, list):
            raise NetlistSyntaxError(f"nets[{i}].sinks must be an array")
        nets.append(
            Net(
                id=_require_str(entry.get("id"), f"nets[{i}].id"),
                driver=_require_str(entry.get("driver"), f"nets[{i}].driver"),
                sinks=tuple(_require_str(s, f"nets[{i}].sinks[{j}]") for j, s in enumerate(sinks)),
            )
        )

    return PlacedNetlist(
        design_name=_require_str(doc["design_name"], "design_name"),
        die_width=_require_number(doc["die_width"], "die_width"),
        die_height=_require_number(doc["die_height"], "die_height"),
        cells=tuple(cells),
        nets=tuple(nets),
    )


def write_netlist(n: PlacedNetlist) -> bytes:
    """Serialize to the canonical interchange document (byte-deterministic)."""
    doc: dict = {
        "design_name": n.design_name,
        "die_width": n.die_width,
        "die_height": n.die_height,
        "cells": [],
        "nets": [],
    }
    for cell in n.cells:
        entry = {
            "id": cell.id,
            "kind": cell.kind.value,
            "x": cell.x,
            "y": cell.y,
            "master": cell.master,
        }
        if cell.control_net is not None:
            entry["control_net"] = cell.control_net
        doc["cells"].append(entry)
    for net in n.nets:
        doc["nets"].append({"id": net.id, "driver": net.driver, "sinks": list(net.sinks)})
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")
