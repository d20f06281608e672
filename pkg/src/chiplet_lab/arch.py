"""Package architecture model: chiplet grid, DRAM placement, config parsing.

The accelerator package is a rows x cols array of compute chiplets joined by
an XY mesh Network-on-Package.  DRAM chiplets sit in two auxiliary columns
flanking the compute array (column 0 on the west, column cols+1 on the east),
alternating west/east in index order.  The full router grid is therefore
(cols + 2) wide; grid positions without an attached chiplet are plain routing
points, which keeps every node pair connected by a minimal XY route.

Bandwidths are stored in bytes/cycle, converted from GB/s at config load time
using the package clock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path

MIB = 1 << 20

__all__ = [
    "ArchError",
    "NodeKind",
    "NodeId",
    "ArchConfig",
    "parse_arch",
    "load_arch_file",
    "render_arch",
]


class ArchError(ValueError):
    """Raised for malformed grid strings, config files, or field values."""


class NodeKind(IntEnum):
    COMPUTE = 0
    DRAM = 1
    ROUTER = 2  # unattached grid position, used only as a routing waypoint


@dataclass(frozen=True, order=True)
class NodeId:
    """A position in the full router grid, tagged with what is attached there."""

    kind: NodeKind
    x: int
    y: int

    @property
    def label(self) -> str:
        prefix = {NodeKind.COMPUTE: "C", NodeKind.DRAM: "D", NodeKind.ROUTER: "R"}[self.kind]
        return f"{prefix}{self.x}.{self.y}"

    @classmethod
    def from_label(cls, text: str) -> "NodeId":
        m = re.fullmatch(r"([CDR])(\d+)\.(\d+)", text)
        if m is None:
            raise ArchError(f"bad node label {text!r}")
        kind = {"C": NodeKind.COMPUTE, "D": NodeKind.DRAM, "R": NodeKind.ROUTER}[m.group(1)]
        return cls(kind, int(m.group(2)), int(m.group(3)))

    def __str__(self) -> str:
        return self.label


def _side_rows(rows: int, count: int) -> list[int]:
    """Grid rows used by `count` DRAM chiplets on one side of the array.

    Chiplets are spread evenly over the compute rows; if a side holds more
    DRAM chiplets than there are compute rows, the grid grows downward.
    """
    if count <= 0:
        return []
    if count == 1:
        return [(rows - 1) // 2]
    if count <= rows:
        return [i * (rows - 1) // (count - 1) for i in range(count)]
    return list(range(count))


@dataclass(frozen=True)
class ArchConfig:
    """Immutable description of one package configuration.

    Bandwidth fields are bytes per cycle.  `gbuf_bytes` is the per-chiplet
    global buffer capacity used by the spill model.
    """

    rows: int
    cols: int
    dram_count: int = 4
    nop_bw: float = 4.0
    noc_bw: float = 8.0
    dram_bw: float = 16.0
    hop_latency: int = 1
    pe_count: int = 256
    macs_per_pe_cycle: int = 1
    gbuf_bytes: int = 2 * MIB
    clock_hz: float = 1e9

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ArchError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.dram_count < 1:
            raise ArchError("dram_count must be >= 1")
        for name in ("nop_bw", "noc_bw", "dram_bw", "clock_hz"):
            if getattr(self, name) <= 0:
                raise ArchError(f"{name} must be > 0")
        if self.hop_latency < 0:
            raise ArchError("hop_latency must be >= 0")
        if self.pe_count < 1 or self.macs_per_pe_cycle < 1:
            raise ArchError("pe_count and macs_per_pe_cycle must be >= 1")
        if self.gbuf_bytes < 1:
            raise ArchError("gbuf_bytes must be >= 1")

    @property
    def label(self) -> str:
        return f"{self.rows}x{self.cols}"

    @property
    def compute_count(self) -> int:
        return self.rows * self.cols

    @property
    def west_dram_count(self) -> int:
        return (self.dram_count + 1) // 2

    @property
    def east_dram_count(self) -> int:
        return self.dram_count // 2

    @property
    def grid_width(self) -> int:
        return self.cols + 2

    @property
    def grid_height(self) -> int:
        return max(self.rows, self.west_dram_count, self.east_dram_count)

    def compute_nodes(self) -> tuple[NodeId, ...]:
        return tuple(
            NodeId(NodeKind.COMPUTE, x, y)
            for y in range(self.rows)
            for x in range(1, self.cols + 1)
        )

    def dram_nodes(self) -> tuple[NodeId, ...]:
        west = _side_rows(self.rows, self.west_dram_count)
        east = _side_rows(self.rows, self.east_dram_count)
        out: list[NodeId] = []
        for i in range(self.dram_count):
            if i % 2 == 0:
                out.append(NodeId(NodeKind.DRAM, 0, west[i // 2]))
            else:
                out.append(NodeId(NodeKind.DRAM, self.cols + 1, east[i // 2]))
        return tuple(out)

    def nodes(self) -> tuple[NodeId, ...]:
        """All attached nodes, compute first (row-major), then DRAM in index order."""
        return self.compute_nodes() + self.dram_nodes()

    def dram_home(self, index: int) -> NodeId:
        """Home DRAM chiplet for a layer, assigned round-robin by layer index."""
        return self.dram_nodes()[index % self.dram_count]


_GRID_RE = re.compile(r"(\d+)x(\d+)")

# Config keys: GB/s keys are converted with the clock; *_bpc / clock_hz /
# gbuf_bytes carry exact values so render_arch -> parse_arch round-trips.
_EXACT_KEYS = {
    "nop_bpc": "nop_bw",
    "noc_bpc": "noc_bw",
    "dram_bpc": "dram_bw",
    "clock_hz": "clock_hz",
    "gbuf_bytes": "gbuf_bytes",
}
_SCALED_KEYS = {
    "nop_bw_gbps": "nop_bw",
    "noc_bw_gbps": "noc_bw",
    "dram_bw_gbps": "dram_bw",
    "clock_ghz": "clock_hz",
    "gbuf_mib": "gbuf_bytes",
}
_INT_KEYS = {
    "dram_count": "dram_count",
    "pe_count": "pe_count",
    "hop_latency": "hop_latency",
    "macs_per_pe": "macs_per_pe_cycle",
}
_ALL_KEYS = sorted(_EXACT_KEYS | _SCALED_KEYS | _INT_KEYS)


def _build_config(grid: str, pairs: dict[str, str], normalize: bool) -> ArchConfig:
    m = _GRID_RE.fullmatch(grid.strip())
    if m is None:
        raise ArchError(f"bad grid {grid!r}, expected <rows>x<cols>")
    rows, cols = int(m.group(1)), int(m.group(2))
    if rows < 1 or cols < 1:
        raise ArchError(f"grid must be at least 1x1, got {grid!r}")
    if normalize:
        rows, cols = min(rows, cols), max(rows, cols)

    fields: dict[str, float | int] = {"rows": rows, "cols": cols}

    def claim(field: str, key: str) -> None:
        if field in fields:
            raise ArchError(f"duplicate setting for {field} (key {key!r})")

    scaled: dict[str, float] = {}
    for key, raw in pairs.items():
        try:
            if key in _INT_KEYS:
                claim(_INT_KEYS[key], key)
                fields[_INT_KEYS[key]] = int(raw)
            elif key in _EXACT_KEYS:
                claim(_EXACT_KEYS[key], key)
                field = _EXACT_KEYS[key]
                fields[field] = int(raw) if field == "gbuf_bytes" else float(raw)
            elif key in _SCALED_KEYS:
                claim(_SCALED_KEYS[key], key)
                scaled[_SCALED_KEYS[key]] = float(raw)
            else:
                raise ArchError(f"unknown config key {key!r} (known: {', '.join(_ALL_KEYS)})")
        except ValueError as exc:
            if isinstance(exc, ArchError):
                raise
            raise ArchError(f"bad value for {key}: {raw!r}") from exc

    if "clock_hz" in scaled:
        fields["clock_hz"] = scaled.pop("clock_hz") * 1e9
    clock = float(fields.get("clock_hz", ArchConfig.clock_hz))
    if "gbuf_bytes" in scaled:
        fields["gbuf_bytes"] = int(scaled.pop("gbuf_bytes") * MIB)
    for field, gbps in scaled.items():
        fields[field] = gbps * 1e9 / clock

    return ArchConfig(**fields)  # type: ignore[arg-type]


def parse_arch(text: str, *, normalize: bool = False) -> ArchConfig:
    """Parse a grid shorthand like ``3x3`` or ``3x3,dram_count=2,nop_bw_gbps=8``.

    The first comma-separated token is the grid; the rest are key=value
    overrides using the same keys as arch config files.  With ``normalize``,
    ``AxB`` and ``BxA`` map to the same (rows=min, cols=max) configuration.
    """
    parts = [p.strip() for p in text.strip().split(",") if p.strip()]
    if not parts:
        raise ArchError("empty arch string")
    pairs: dict[str, str] = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ArchError(f"bad override {item!r}, expected key=value")
        if key.strip() in pairs:
            raise ArchError(f"duplicate key {key.strip()!r}")
        pairs[key.strip()] = value.strip()
    return _build_config(parts[0], pairs, normalize)


def load_arch_file(path: str | Path, *, normalize: bool = False) -> ArchConfig:
    """Load a UTF-8 ``key=value`` config file.  ``grid=<rows>x<cols>`` is required.

    Blank lines and lines starting with ``#`` are ignored; unknown keys are
    rejected.
    """
    text = Path(path).read_text(encoding="utf-8")
    grid: str | None = None
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ArchError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = key.strip(), value.strip()
        if key == "grid":
            if grid is not None:
                raise ArchError(f"{path}:{lineno}: duplicate grid")
            grid = value
        else:
            if key in pairs:
                raise ArchError(f"{path}:{lineno}: duplicate key {key!r}")
            pairs[key] = value
    if grid is None:
        raise ArchError(f"{path}: missing required key 'grid'")
    return _build_config(grid, pairs, normalize)


def render_arch(cfg: ArchConfig) -> str:
    """Render a config as a parse_arch shorthand; exact round-trip guaranteed."""
    defaults = ArchConfig(rows=cfg.rows, cols=cfg.cols)
    out = [cfg.label]
    for key, field in sorted(_EXACT_KEYS.items() | _INT_KEYS.items()):
        value = getattr(cfg, field)
        if value != getattr(defaults, field):
            out.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    return ",".join(out)


def with_overrides(cfg: ArchConfig, **changes: object) -> ArchConfig:
    """Functional update helper (validates through __post_init__)."""
    return replace(cfg, **changes)  # type: ignore[arg-type]
