"""Network-on-Package simulation: XY routing, link contention, timing.

Routing is X-first dimension order on the full router grid.  A multicast is
delivered over the union of the XY paths to its destinations, which is always
a tree, and occupies every tree link for one serialization window.

Timing model per message: latency = hop_latency * hops + ceil(bytes/nop_bw)
(cut-through).  With store_and_forward the serialization term is paid per
hop for the arrival time, but link occupancy stays one window.  Messages
become eligible to inject when their dependencies fire: Weight/InputAct at
the consumer layer's dependency time (all predecessor layers' compute done),
PartialSum when the sending part finishes, OutputAct/Spill when the layer
completes.  Re-fetches of spilled data additionally wait for the spill to
land in DRAM.  Contention is resolved greedily in (eligibility, id) order
with full-tree reservation, which yields per-link FIFO service.

Busy ledgers are accumulated independently of the schedule: NoP counts every
tree link for the serialization window; NoC counts ceil(bytes/noc_bw) per
compute-chiplet endpoint; DRAM counts ceil(bytes/dram_bw) per DRAM endpoint.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from chiplet_lab._core import kernels
from chiplet_lab.arch import ArchConfig, NodeId, NodeKind
from chiplet_lab.mapper import Message, MsgClass, TileAssignment, part_macs
from chiplet_lab.workload import LayerGraph

__all__ = [
    "SimulationError",
    "RouteTree",
    "TraceRecord",
    "TimedTrace",
    "xy_route",
    "multicast_tree",
    "simulate",
    "dump_trace",
    "load_trace",
    "hop_count",
    "is_multicast",
]


class SimulationError(RuntimeError):
    """Raised when the message set cannot be scheduled to completion."""


def _node_at(cfg: ArchConfig, x: int, y: int) -> NodeId:
    if 1 <= x <= cfg.cols and 0 <= y < cfg.rows:
        return NodeId(NodeKind.COMPUTE, x, y)
    for d in cfg.dram_nodes():
        if d.x == x and d.y == y:
            return d
    return NodeId(NodeKind.ROUTER, x, y)


def xy_route(src: NodeId, dst: NodeId, cfg: ArchConfig) -> list[NodeId]:
    """Nodes visited after src on the X-first minimal route; empty if src == dst."""
    path: list[NodeId] = []
    x, y = src.x, src.y
    while x != dst.x:
        x += 1 if x < dst.x else -1
        path.append(_node_at(cfg, x, y))
    while y != dst.y:
        y += 1 if y < dst.y else -1
        path.append(_node_at(cfg, x, y))
    return path


@dataclass(frozen=True)
class RouteTree:
    """Union of XY paths from one source to a destination set."""

    root: NodeId
    dsts: tuple[NodeId, ...]
    links: frozenset[tuple[NodeId, NodeId]]

    @property
    def hops(self) -> int:
        return len(self.links)


def multicast_tree(src: NodeId, dsts: tuple[NodeId, ...], cfg: ArchConfig) -> RouteTree:
    """Multicast delivery tree; for a single destination this is the XY path."""
    links: set[tuple[NodeId, NodeId]] = set()
    for dst in dsts:
        prev = src
        for node in xy_route(src, dst, cfg):
            links.add((prev, node))
            prev = node
    return RouteTree(src, tuple(dsts), frozenset(links))


@dataclass(frozen=True)
class TraceRecord:
    """One scheduled message with its timing and route metrics."""

    msg: Message
    start: int
    end: int
    hops: int
    longest_path: int

    @property
    def span(self) -> int:
        return self.end - self.start


def hop_count(record: TraceRecord) -> int:
    """Tree-link count of the message's route (unicast: path length)."""
    return record.hops


def is_multicast(record: TraceRecord) -> bool:
    return len(record.msg.dsts) >= 2


@dataclass
class TimedTrace:
    """Scheduled message trace plus the busy-cycle ledgers for one run."""

    workload: str
    cfg: ArchConfig
    messages: list[Message]
    start: np.ndarray
    end: np.ndarray
    hops: np.ndarray
    longest_path: np.ndarray
    busy: dict[str, int]
    link_busy: np.ndarray = field(repr=False)
    compute_cycles: int = 0
    makespan: int = 0
    store_and_forward: bool = False
    serial_multicast: bool = False

    def records(self) -> Iterator[TraceRecord]:
        for i, msg in enumerate(self.messages):
            yield TraceRecord(
                msg, int(self.start[i]), int(self.end[i]), int(self.hops[i]),
                int(self.longest_path[i]),
            )

    def link_busy_map(self) -> dict[tuple[NodeId, NodeId], int]:
        """Per-link busy cycles keyed by (from, to) nodes; zero links omitted."""
        width = self.cfg.grid_width
        out: dict[tuple[NodeId, NodeId], int] = {}
        deltas = ((1, 0), (-1, 0), (0, 1), (0, -1))
        for link_id, cycles in enumerate(self.link_busy):
            if cycles == 0:
                continue
            node, d = divmod(link_id, 4)
            y, x = divmod(node, width)
            dx, dy = deltas[d]
            out[(_node_at(self.cfg, x, y), _node_at(self.cfg, x + dx, y + dy))] = int(cycles)
        return out


def _ceil_div_bw(nbytes: int, bw: float) -> int:
    return int(math.ceil(nbytes / bw))


def _expand_serial(messages: list[Message]) -> list[Message]:
    """Split every multicast into per-destination unicasts, re-numbering ids."""
    out: list[Message] = []
    for m in messages:
        if len(m.dsts) == 1:
            out.append(
                Message(len(out), m.layer_id, m.msg_class, m.src, m.dsts, m.bytes, m.gate_layer)
            )
        else:
            for dst in m.dsts:
                out.append(
                    Message(len(out), m.layer_id, m.msg_class, m.src, (dst,), m.bytes,
                            m.gate_layer)
                )
    return out


def simulate(
    messages: list[Message],
    assignments: dict[str, TileAssignment],
    graph: LayerGraph,
    cfg: ArchConfig,
    *,
    store_and_forward: bool = False,
    serial_multicast: bool = False,
) -> TimedTrace:
    """Schedule a message list against the package mesh and compute model."""
    if serial_multicast:
        messages = _expand_serial(messages)
    n_msgs = len(messages)
    width, height = cfg.grid_width, cfg.grid_height
    n_layers = len(graph.layers)
    layer_ord = {layer.id: i for i, layer in enumerate(graph.layers)}

    # parts grouped by layer, ordinals layer-major
    layer_parts_off = [0] * (n_layers + 1)
    part_dur: list[int] = []
    part_layer: list[int] = []
    part_of: dict[tuple[int, NodeId], int] = {}
    pe_rate = cfg.pe_count * cfg.macs_per_pe_cycle
    for li, layer in enumerate(graph.layers):
        asg = assignments.get(layer.id)
        if asg is None:
            raise SimulationError(f"layer {layer.id!r} has no tile assignment")
        for p in asg.parts:
            part_of[(li, p.chiplet)] = len(part_dur)
            part_layer.append(li)
            macs = part_macs(graph.layer(layer.id), asg.strategy, p.lo, p.hi)
            part_dur.append(-(-macs // pe_rate))
        layer_parts_off[li + 1] = len(part_dur)
    n_parts = len(part_dur)

    def node_idx(n: NodeId) -> int:
        return n.y * width + n.x

    srcs = np.fromiter((node_idx(m.src) for m in messages), dtype=np.int32, count=n_msgs)
    dsts_off = np.zeros(n_msgs + 1, dtype=np.int64)
    for i, m in enumerate(messages):
        dsts_off[i + 1] = dsts_off[i] + len(m.dsts)
    dsts_flat = np.fromiter(
        (node_idx(d) for m in messages for d in m.dsts), dtype=np.int32,
        count=int(dsts_off[-1]),
    )
    links_flat, links_off, hops, longest = kernels.build_trees(
        width, height, srcs, dsts_flat, dsts_off
    )

    ser = np.empty(n_msgs, dtype=np.int64)
    lat = np.empty(n_msgs, dtype=np.int64)
    kind = np.zeros(n_msgs, dtype=np.int8)
    msg_layer = np.empty(n_msgs, dtype=np.int32)
    gates = np.ones(n_msgs, dtype=np.int8)
    deliver_off = np.zeros(n_msgs + 1, dtype=np.int64)
    deliver: list[int] = []
    part_ps: list[list[int]] = [[] for _ in range(n_parts)]
    layer_dep_msgs: list[list[int]] = [[] for _ in range(n_layers)]
    layer_out_msgs: list[list[int]] = [[] for _ in range(n_layers)]
    layer_ps_count = np.zeros(n_layers, dtype=np.int32)
    spill_waiters: list[list[int]] = [[] for _ in range(n_layers)]
    busy_noc = 0
    busy_dram = 0

    for i, m in enumerate(messages):
        li = layer_ord[m.layer_id]
        msg_layer[i] = li
        nb = m.bytes
        ser_i = _ceil_div_bw(nb, cfg.nop_bw)
        ser[i] = ser_i
        h = int(hops[i])
        lat[i] = cfg.hop_latency * h + (ser_i * h if store_and_forward else ser_i)
        noc_ends = (1 if m.src.kind is NodeKind.COMPUTE else 0) + sum(
            1 for d in m.dsts if d.kind is NodeKind.COMPUTE
        )
        dram_ends = (1 if m.src.kind is NodeKind.DRAM else 0) + sum(
            1 for d in m.dsts if d.kind is NodeKind.DRAM
        )
        busy_noc += _ceil_div_bw(nb, cfg.noc_bw) * noc_ends
        busy_dram += _ceil_div_bw(nb, cfg.dram_bw) * dram_ends

        if m.msg_class in (MsgClass.Weight, MsgClass.InputAct):
            kind[i] = 0
            layer_dep_msgs[li].append(i)
            if m.gate_layer is not None:
                gates[i] = 2
                spill_waiters[layer_ord[m.gate_layer]].append(i)
            for d in m.dsts:
                p = part_of.get((li, d))
                if p is None:
                    raise SimulationError(
                        f"message {m.id}: destination {d} hosts no part of {m.layer_id!r}"
                    )
                deliver.append(p)
        elif m.msg_class is MsgClass.PartialSum:
            kind[i] = 1
            layer_ps_count[li] += 1
            p = part_of.get((li, m.src))
            if p is None:
                raise SimulationError(
                    f"message {m.id}: source {m.src} hosts no part of {m.layer_id!r}"
                )
            part_ps[p].append(i)
        else:  # OutputAct / Spill
            kind[i] = 2
            layer_out_msgs[li].append(i)
        deliver_off[i + 1] = len(deliver)

    part_in_count = np.zeros(n_parts, dtype=np.int32)
    for p in deliver:
        part_in_count[p] += 1

    layer_dep_count = np.zeros(n_layers, dtype=np.int32)
    layer_succs: list[list[int]] = [[] for _ in range(n_layers)]
    for li, layer in enumerate(graph.layers):
        distinct = sorted({layer_ord[p] for p in layer.preds})
        layer_dep_count[li] = len(distinct)
        for p in distinct:
            layer_succs[p].append(li)

    def csr(lists: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
        off = np.zeros(len(lists) + 1, dtype=np.int64)
        for i, items in enumerate(lists):
            off[i + 1] = off[i] + len(items)
        flat = np.fromiter(
            (x for items in lists for x in items), dtype=np.int32, count=int(off[-1])
        )
        return flat, off

    part_ps_flat, part_ps_off = csr(part_ps)
    dep_flat, dep_off = csr(layer_dep_msgs)
    out_flat, out_off = csr(layer_out_msgs)
    succs_flat, succs_off = csr(layer_succs)
    waiters_flat, waiters_off = csr(spill_waiters)

    result = kernels.run_schedule(
        width * height * 4,
        links_flat, links_off,
        ser, lat, kind, msg_layer, gates,
        np.asarray(deliver, dtype=np.int32), deliver_off,
        np.asarray(part_layer, dtype=np.int32),
        np.asarray(part_dur, dtype=np.int64),
        part_in_count,
        part_ps_flat, part_ps_off,
        np.asarray(layer_parts_off, dtype=np.int64),
        layer_dep_count,
        dep_flat, dep_off,
        out_flat, out_off,
        layer_ps_count,
        succs_flat, succs_off,
        waiters_flat, waiters_off,
    )
    if result["first_incomplete"] >= 0:
        fi = result["first_incomplete"]
        if fi < n_layers:
            raise SimulationError(
                f"schedule deadlock: layer {graph.layers[fi].id!r} never completed"
            )
        raise SimulationError("schedule deadlock: unscheduled messages remain")

    compute_cycles = 0
    for li in range(n_layers):
        span = 0
        for p in range(layer_parts_off[li], layer_parts_off[li + 1]):
            if part_dur[p] > span:
                span = part_dur[p]
        compute_cycles += span

    busy_nop = int(result["busy_nop"])
    return TimedTrace(
        workload=graph.name,
        cfg=cfg,
        messages=messages,
        start=result["start"],
        end=result["end"],
        hops=np.asarray(hops, dtype=np.int64),
        longest_path=np.asarray(longest, dtype=np.int64),
        busy={"noc": busy_noc, "nop": busy_nop, "dram": busy_dram},
        link_busy=result["link_busy"],
        compute_cycles=compute_cycles,
        makespan=int(result["makespan"]),
        store_and_forward=store_and_forward,
        serial_multicast=serial_multicast,
    )


_CSV_HEADER = [
    "msg_id", "layer_id", "class", "src", "dsts", "bytes", "hops",
    "is_multicast", "start", "end",
]


def dump_trace(trace: TimedTrace, path: str | Path) -> None:
    """Write the trace as CSV, one row per message, stable msg_id order."""
    p = Path(path)
    tmp = p.with_name(p.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for i, m in enumerate(trace.messages):
            writer.writerow(
                [
                    m.id,
                    m.layer_id,
                    m.msg_class.value,
                    m.src.label,
                    "|".join(d.label for d in m.dsts),
                    m.bytes,
                    int(trace.hops[i]),
                    1 if len(m.dsts) >= 2 else 0,
                    int(trace.start[i]),
                    int(trace.end[i]),
                ]
            )
    tmp.replace(p)


@dataclass(frozen=True)
class TraceRow:
    """One row of a dumped trace file."""

    msg_id: int
    layer_id: str
    msg_class: MsgClass
    src: NodeId
    dsts: tuple[NodeId, ...]
    bytes: int
    hops: int
    is_multicast: bool
    start: int
    end: int


def load_trace(path: str | Path) -> list[TraceRow]:
    """Read a dumped trace CSV back into rows."""
    rows: list[TraceRow] = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise SimulationError(f"{path}: unexpected trace header {header!r}")
        for rec in reader:
            rows.append(
                TraceRow(
                    msg_id=int(rec[0]),
                    layer_id=rec[1],
                    msg_class=MsgClass(rec[2]),
                    src=NodeId.from_label(rec[3]),
                    dsts=tuple(NodeId.from_label(t) for t in rec[4].split("|")),
                    bytes=int(rec[5]),
                    hops=int(rec[6]),
                    is_multicast=rec[7] == "1",
                    start=int(rec[8]),
                    end=int(rec[9]),
                )
            )
    return rows
