"""Shared builders for hand-crafted netlists used across the test suite."""

from __future__ import annotations

from ctsbench.netlist import CellKind, Net, PlacedCell, PlacedNetlist


def ff(cell_id: str, x: float, y: float, control: str | None = None) -> PlacedCell:
    return PlacedCell(cell_id, CellKind.FLIP_FLOP, x, y, "dfxtp_1", control)


def gate(cell_id: str, x: float, y: float) -> PlacedCell:
    return PlacedCell(cell_id, CellKind.LOGIC, x, y, "nand2_1")


def net(net_id: str, driver: str, *sinks: str) -> Net:
    return Net(net_id, driver, tuple(sinks))


def make_netlist(cells, nets=(), w: float = 1.0, h: float = 1.0, name: str = "t") -> PlacedNetlist:
    return PlacedNetlist(name, w, h, tuple(cells), tuple(nets))
