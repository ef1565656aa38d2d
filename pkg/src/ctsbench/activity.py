"""Switching-activity ingestion: a SAIF subset and a CSV fallback.

Only toggle counts (TC) feed features; T0/T1/TZ/TX durations are parsed and
discarded. Entry names map one-to-one onto cell ids. Absent cells are distinct
from zero-toggle cells: ``get`` returns ``None`` for the former and ``0`` for
the latter, while ``log_activity`` folds both to 0.0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import CtsBenchError


class ActivitySyntaxError(CtsBenchError):
    """Malformed SAIF or activity CSV input."""

    def __init__(self, reason: str, line: int | None = None) -> None:
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{reason}{where}")


class DuplicateNameError(CtsBenchError):
    """The same cell name appears twice in one activity source."""


class NegativeToggleError(CtsBenchError):
    """A toggle count is negative."""


@dataclass(frozen=True)
class ActivityMap:
    """Immutable mapping of cell id to toggle count."""

    toggles: Mapping[str, int]

    def __post_init__(self) -> None:
        for name, count in self.toggles.items():
            if isinstance(count, bool) or not isinstance(count, int):
                raise ActivitySyntaxError(f"toggle count for {name!r} must be an integer")
            if count < 0:
                raise NegativeToggleError(f"toggle count for {name!r} is negative ({count})")

    def get(self, cell_id: str) -> int | None:
        """Toggle count, or None when the cell has no activity entry."""
        return self.toggles.get(cell_id)

    def log_activity(self, cell_id: str) -> float:
        """ln(1 + toggle_count); 0.0 for absent cells."""
        count = self.toggles.get(cell_id)
        return 0.0 if count is None else math.log1p(count)

    def __contains__(self, cell_id: str) -> bool:
        return cell_id in self.toggles

    def __len__(self) -> int:
        return len(self.toggles)

    def items(self):
        return self.toggles.items()


# --- SAIF subset -----------------------------------------------------------

_HEADER_KEYS = {
    "SAIFVERSION", "DIRECTION", "DESIGN", "DATE", "VENDOR",
    "PROGRAM_NAME", "VERSION", "DIVIDER", "TIMESCALE", "DURATION",
}
_ATTR_KEYS = {"T0", "T1", "TZ", "TX", "TC", "IG"}


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    """Yield (kind, token, line) with kind in {'(', ')', 'atom', 'string'}."""
    line = 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch in "()":
            yield (ch, ch, line)
            i += 1
        elif ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ActivitySyntaxError("unterminated string", line)
            yield ("string", text[i + 1 : j], line)
            line += text.count("\n", i, j)
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"':
                j += 1
            yield ("atom", text[i:j], line)
            i = j


def _parse_sexprs(text: str):
    """Parse the token stream into nested lists of (value, line) leaves."""
    stack: list[list] = [[]]
    last_line = 1
    for kind, tok, line in _tokenize(text):
        last_line = line
        if kind == "(":
            node: list = []
            stack[-1].append(node)
            stack.append(node)
        elif kind == ")":
            if len(stack) == 1:
                raise ActivitySyntaxError("unbalanced ')'", line)
            stack.pop()
        else:
            stack[-1].append((tok, line))
    if len(stack) != 1:
        raise ActivitySyntaxError("unbalanced '('", last_line)
    return stack[0]


def _atom(node, what: str) -> tuple[str, int]:
    if not (isinstance(node, tuple) and len(node) == 2):
        raise ActivitySyntaxError(f"expected {what}")
    return node


def _int_atom(node, what: str) -> int:
    tok, line = _atom(node, what)
    try:
        return int(tok)
    except ValueError:
        raise ActivitySyntaxError(f"{what} must be an integer, got {tok!r}", line) from None


def _read_net_entries(net_node: list, toggles: dict[str, int]) -> None:
    for entry in net_node[1:]:
        if not isinstance(entry, list) or not entry:
            raise ActivitySyntaxError("NET entries must be lists")
        name, line = _atom(entry[0], "signal name")
        if name in toggles:
            raise DuplicateNameError(f"duplicate activity entry for {name!r}")
        tc: int | None = None
        for attr in entry[1:]:
            if not (isinstance(attr, list) and len(attr) == 2):
                raise ActivitySyntaxError(f"bad attribute in entry {name!r}", line)
            key, key_line = _atom(attr[0], "attribute key")
            if key not in _ATTR_KEYS:
                raise ActivitySyntaxError(f"unknown attribute {key!r} in entry {name!r}", key_line)
            value = _int_atom(attr[1], f"{key} value")
            if key == "TC":
                if value < 0:
                    raise ActivitySyntaxError(f"TC for {name!r} must be non-negative", key_line)
                tc = value
        if tc is None:
            raise ActivitySyntaxError(f"entry {name!r} has no TC attribute", line)
        toggles[name] = tc


def _read_instance(inst_node: list, toggles: dict[str, int], depth: int) -> None:
    if len(inst_node) < 2:
        raise ActivitySyntaxError("INSTANCE requires a name")
    for child in inst_node[2:]:
        if not isinstance(child, list) or not child:
            raise ActivitySyntaxError("INSTANCE children must be lists")
        head, line = _atom(child[0], "INSTANCE child key")
        if head == "NET":
            _read_net_entries(child, toggles)
        elif head == "INSTANCE":
            if depth >= 1:
                raise ActivitySyntaxError("INSTANCE nesting deeper than one level", line)
            _read_instance(child, toggles, depth + 1)
        else:
            raise ActivitySyntaxError(f"unexpected key {head!r} inside INSTANCE", line)


def parse_saif(data: bytes | str) -> ActivityMap:
    """Parse the SAIF subset into toggle counts keyed by cell id."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    top = _parse_sexprs(text)
    if len(top) != 1 or not isinstance(top[0], list) or not top[0]:
        raise ActivitySyntaxError("expected a single (SAIFILE ...) form")
    root = top[0]
    head, line = _atom(root[0], "SAIFILE keyword")
    if head != "SAIFILE":
        raise ActivitySyntaxError(f"expected SAIFILE, got {head!r}", line)
    toggles: dict[str, int] = {}
    for child in root[1:]:
        if not isinstance(child, list) or not child:
            raise ActivitySyntaxError("SAIFILE children must be lists")
        key, key_line = _atom(child[0], "SAIFILE child key")
        if key == "INSTANCE":
            _read_instance(child, toggles, depth=0)
        elif key not in _HEADER_KEYS:
            raise ActivitySyntaxError(f"unexpected key {key!r} inside SAIFILE", key_line)
    return ActivityMap(toggles)


def write_saif(a: ActivityMap, duration: int = 10_000, instance: str = "top") -> bytes:
    """Emit the SAIF subset, entries sorted by name (byte-deterministic)."""
    lines = [
        "(SAIFILE",
        '  (SAIFVERSION "2.0")',
        '  (DIRECTION "backward")',
        f"  (DURATION {duration})",
        f"  (INSTANCE {instance}",
        "    (NET",
    ]
    for name, tc in sorted(a.items()):
        low = duration // 2
        lines.append(f"      ({name} (T0 {low}) (T1 {duration - low}) (TC {tc}))")
    lines += ["    )", "  )", ")", ""]
    return "\n".join(lines).encode("utf-8")


# --- CSV fallback ----------------------------------------------------------

CSV_HEADER = ("cell_id", "toggle_count")


def parse_activity_csv(data: bytes | str) -> ActivityMap:
    """Parse the two-column ``cell_id,toggle_count`` fallback format."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ActivitySyntaxError("empty document") from None
    if tuple(header) != CSV_HEADER:
        raise ActivitySyntaxError(f"header must be {','.join(CSV_HEADER)!r}, got {header!r}", line=1)
    toggles: dict[str, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ActivitySyntaxError(f"expected 2 columns, got {len(row)}", lineno)
        name, raw = row
        if not name:
            raise ActivitySyntaxError("empty cell_id", lineno)
        try:
            count = int(raw)
        except ValueError:
            raise ActivitySyntaxError(f"toggle_count must be an integer, got {raw!r}", lineno) from None
        if count < 0:
            raise NegativeToggleError(f"toggle count for {name!r} is negative ({count})")
        if name in toggles:
            raise DuplicateNameError(f"duplicate activity entry for {name!r}")
        toggles[name] = count
    return ActivityMap(toggles)


def write_activity_csv(a: ActivityMap) -> bytes:
    """Emit the CSV fallback, rows sorted by name (byte-deterministic)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for name, tc in sorted(a.items()):
        writer.writerow([name, tc])
    return buf.getvalue().encode("utf-8")
