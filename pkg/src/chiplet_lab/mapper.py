"""Mapping layers onto chiplets and deriving the message trace.

Each layer is split across the chiplets of its placement region by one of
four strategies:

* SplitK: partition the independent output axis (output channels / output
  rows of a GEMM / hidden units).  Weights are sliced; inputs are shared.
* SplitHW: partition the output spatially (feature-map rows / GEMM columns /
  flat element ranges).  Weights are shared (one multicast); inputs are
  sliced, with halo overlap where receptive fields overlap.
* SplitC: partition the reduction axis.  Weights and inputs are sliced but
  every part produces a full-size partial sum that is reduced on the
  lowest-indexed part's chiplet.
* Replicate: every part computes the whole layer (no traffic savings); never
  auto-selected, available for explicit assignments.

Traffic is derived exactly: producer output slices are intersected with
consumer input needs on the tensor's canonical layout.  When producer and
consumer disagree about the layout (reshapes, Concat offsets), regions fall
back to exact flat-element interval lists, so byte accounting never rounds.
Consumers with identical needs from one producer slice share one multicast.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from chiplet_lab.arch import ArchConfig, NodeId
from chiplet_lab.workload import (
    Layer,
    LayerGraph,
    LayerOp,
    Layout,
    OperandSlot,
    layer_macs,
    operand_slots,
    out_hw,
    out_layout,
    output_elems,
    tensor_bytes,
    _weight_elems,
)

__all__ = [
    "MappingError",
    "Strategy",
    "MsgClass",
    "Part",
    "TileAssignment",
    "Message",
    "PolicyKind",
    "MappingPolicy",
    "parse_policy",
    "choose_strategy",
    "place_layers",
    "build_messages",
    "part_macs",
    "weight_slice_elems",
]


class MappingError(ValueError):
    """Raised when a layer cannot be split over its placement region."""


class Strategy(Enum):
    SplitK = "SplitK"
    SplitHW = "SplitHW"
    SplitC = "SplitC"
    Replicate = "Replicate"


class MsgClass(Enum):
    Weight = "Weight"
    InputAct = "InputAct"
    OutputAct = "OutputAct"
    PartialSum = "PartialSum"
    Spill = "Spill"


@dataclass(frozen=True)
class Part:
    """One slice of a layer: the chiplet it runs on and its [lo, hi) range
    over the strategy's split axis."""

    chiplet: NodeId
    lo: int
    hi: int

    @property
    def span(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class TileAssignment:
    layer_id: str
    strategy: Strategy
    parts: tuple[Part, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise MappingError(f"layer {self.layer_id!r}: empty assignment")
        chiplets = [p.chiplet for p in self.parts]
        if len(set(chiplets)) != len(chiplets):
            raise MappingError(f"layer {self.layer_id!r}: duplicate chiplet in assignment")


@dataclass(frozen=True)
class Message:
    """One transfer over the package mesh.  `dsts` is ordered, never empty,
    never contains `src`.  `gate_layer` marks re-fetches of spilled data:
    the message may not leave DRAM before that layer's spill lands."""

    id: int
    layer_id: str
    msg_class: MsgClass
    src: NodeId
    dsts: tuple[NodeId, ...]
    bytes: int
    gate_layer: str | None = None

    def __post_init__(self) -> None:
        if not self.dsts:
            raise MappingError(f"message {self.id}: no destinations")
        if self.src in self.dsts:
            raise MappingError(f"message {self.id}: src {self.src} in dsts")
        if len(set(self.dsts)) != len(self.dsts):
            raise MappingError(f"message {self.id}: duplicate destination")
        if self.bytes < 1:
            raise MappingError(f"message {self.id}: empty payload")

    @property
    def is_multicast(self) -> bool:
        return len(self.dsts) >= 2


class PolicyKind(Enum):
    AllChiplets = "all"
    PipelineSegments = "pipeline"


@dataclass(frozen=True)
class MappingPolicy:
    kind: PolicyKind
    seg_size: int | None = None

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.PipelineSegments:
            if self.seg_size is None or self.seg_size < 1:
                raise MappingError("pipeline policy needs seg_size >= 1")


def parse_policy(text: str) -> MappingPolicy:
    """Parse ``all`` or ``pipeline:<layers-per-segment>``."""
    t = text.strip()
    if t == "all":
        return MappingPolicy(PolicyKind.AllChiplets)
    if t.startswith("pipeline:"):
        try:
            seg = int(t.split(":", 1)[1])
        except ValueError:
            raise MappingError(f"bad policy {text!r}") from None
        return MappingPolicy(PolicyKind.PipelineSegments, seg)
    raise MappingError(f"unknown policy {text!r} (expected 'all' or 'pipeline:<n>')")


# ---------------------------------------------------------------------------
# Regions: slices of a tensor in its canonical layout.
#
#   ("full",)                 the whole tensor
#   ("axis", i, lo, hi)       interval [lo, hi) on axis i, full on the rest
#   ("axes2", i, al, ah, j, bl, bh)   product of two axis intervals
#   ("flat", ((lo, hi), ...)) explicit flat-element intervals (merged, sorted)
# ---------------------------------------------------------------------------

Region = tuple

FULL: Region = ("full",)


def _layout_elems(layout: Layout) -> int:
    n = 1
    for _, extent in layout:
        n *= extent
    return n


def region_elems(region: Region, layout: Layout) -> int:
    total = _layout_elems(layout)
    tag = region[0]
    if tag == "full":
        return total
    if tag == "axis":
        _, i, lo, hi = region
        return (hi - lo) * (total // layout[i][1])
    if tag == "axes2":
        _, i, al, ah, j, bl, bh = region
        return (ah - al) * (bh - bl) * (total // (layout[i][1] * layout[j][1]))
    if tag == "flat":
        return sum(hi - lo for lo, hi in region[1])
    raise AssertionError(f"bad region {region!r}")


def _to_flat(region: Region, layout: Layout) -> tuple[tuple[int, int], ...]:
    """Exact flat-element intervals of a region, ascending and merged."""
    total = _layout_elems(layout)
    tag = region[0]
    if tag == "full":
        return ((0, total),)
    if tag == "axis":
        _, i, lo, hi = region
        inner = 1
        for _, extent in layout[i + 1 :]:
            inner *= extent
        extent_i = layout[i][1]
        outer = total // (extent_i * inner)
        block = extent_i * inner
        if lo == 0 and hi == extent_i:
            return ((0, total),)
        return tuple((o * block + lo * inner, o * block + hi * inner) for o in range(outer))
    if tag == "flat":
        return region[1]
    raise AssertionError(f"cannot flatten {region!r}")


def _intersect_flat(
    a: tuple[tuple[int, int], ...], b: tuple[tuple[int, int], ...]
) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def intersect_regions(
    src_region: Region, src_layout: Layout, need: Region, need_layout: Layout
) -> Region | None:
    """Intersection of a producer slice with a consumer need.

    Both tensors hold the same elements; when the layouts agree the result
    stays symbolic, otherwise it is computed exactly on flat element indices.
    Returns None when empty.
    """
    if src_layout == need_layout:
        if src_region == FULL:
            result = need
        elif need == FULL:
            result = src_region
        elif src_region[0] == "axis" and need[0] == "axis":
            _, i, alo, ahi = src_region
            _, j, blo, bhi = need
            if i == j:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if lo >= hi:
                    return None
                if lo == 0 and hi == src_layout[i][1]:
                    return FULL
                result = ("axis", i, lo, hi)
            elif i < j:
                result = ("axes2", i, alo, ahi, j, blo, bhi)
            else:
                result = ("axes2", j, blo, bhi, i, alo, ahi)
        else:
            raise AssertionError(f"unsupported regions {src_region!r} x {need!r}")
        return None if region_elems(result, src_layout) == 0 else result
    flat = _intersect_flat(_to_flat(src_region, src_layout), _to_flat(need, need_layout))
    if not flat:
        return None
    return ("flat", flat)


# ---------------------------------------------------------------------------
# Per-op split geometry
# ---------------------------------------------------------------------------

def _split_extent(layer: Layer, strategy: Strategy) -> int | None:
    """Extent of the axis a strategy partitions; None if the op lacks it."""
    op = layer.op
    if strategy is Strategy.SplitK:
        if op is LayerOp.Conv:
            return layer.d("K")
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("M")
        if op is LayerOp.LstmCell:
            return layer.d("hidden")
        if op is LayerOp.Pool:
            return layer.d("C")
        return None
    if strategy is Strategy.SplitHW:
        if op in (LayerOp.Conv, LayerOp.Pool):
            return out_hw(layer)[0]
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("N")
        if op in (LayerOp.EltwiseAdd, LayerOp.Concat, LayerOp.Embedding):
            return layer.d("elems")
        return None
    if strategy is Strategy.SplitC:
        if op is LayerOp.Conv:
            return layer.d("C")
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("K")
        if op is LayerOp.LstmCell:
            return layer.d("hidden") + layer.d("input")
        return None
    return output_elems(layer)  # Replicate: everything everywhere


def _in_row_range(layer: Layer, a: int, b: int) -> tuple[int, int]:
    """Input rows feeding output rows [a, b) of a Conv/Pool (SAME padding)."""
    r = layer.d("R") if layer.op is LayerOp.Conv else layer.d("window")
    stride = layer.d("stride", 1)
    h = layer.d("H")
    ho = out_hw(layer)[0]
    pad_top = max(0, (ho - 1) * stride + r - h) // 2
    lo = max(0, a * stride - pad_top)
    hi = min(h, (b - 1) * stride + r - pad_top)
    return lo, max(lo, hi)


def _slot_need(
    layer: Layer, strategy: Strategy, a: int, b: int, slot: OperandSlot, slot_pos: int
) -> Region | None:
    """Region of an operand slot needed by the part computing range [a, b).

    slot_pos is the slot's index among the layer's slots (Concat offsets).
    """
    op = layer.op
    if strategy is Strategy.Replicate:
        return FULL
    if strategy is Strategy.SplitK:
        if op is LayerOp.Matmul and slot.name == "a":
            return ("axis", 0, a, b)
        return FULL
    if strategy is Strategy.SplitHW:
        if op in (LayerOp.Conv, LayerOp.Pool):
            lo, hi = _in_row_range(layer, a, b)
            return ("axis", 1, lo, hi) if lo < hi else None
        if op in (LayerOp.Fc, LayerOp.Matmul):
            if slot.name == "a":
                return FULL
            return ("axis", 1, a, b)
        if op is LayerOp.Concat:
            raise AssertionError("Concat needs are computed with explicit offsets")
        return ("axis", 0, a, b)  # EltwiseAdd / Embedding flat ranges
    if strategy is Strategy.SplitC:
        if op is LayerOp.Conv:
            return ("axis", 0, a, b)
        if op in (LayerOp.Fc, LayerOp.Matmul):
            if slot.name == "a":
                return ("axis", 1, a, b)
            return ("axis", 0, a, b)
        if op is LayerOp.LstmCell:
            i_dim = layer.d("input")
            if slot.name == "x":
                lo, hi = max(a, 0), min(b, i_dim)
            else:
                lo, hi = max(a - i_dim, 0), min(b - i_dim, layer.d("hidden"))
            return ("axis", 0, lo, hi) if lo < hi else None
    raise MappingError(f"layer {layer.id!r}: {op.value} does not support {strategy.value}")


def _concat_need(extent: int, offset: int, a: int, b: int) -> Region | None:
    lo, hi = max(a - offset, 0), min(b - offset, extent)
    return ("axis", 0, lo, hi) if lo < hi else None


def slot_needs(
    layer: Layer, strategy: Strategy, a: int, b: int, slots: tuple[OperandSlot, ...]
) -> list[Region | None]:
    """Needs of every operand slot for the part computing range [a, b)."""
    if layer.op is LayerOp.Concat and strategy in (Strategy.SplitHW,):
        out: list[Region | None] = []
        offset = 0
        for slot in slots:
            extent = slot.layout[0][1]
            out.append(_concat_need(extent, offset, a, b))
            offset += extent
        return out
    if layer.op is LayerOp.Concat and strategy is Strategy.Replicate:
        return [FULL for _ in slots]
    return [_slot_need(layer, strategy, a, b, slot, i) for i, slot in enumerate(slots)]


def weight_slice_elems(layer: Layer, strategy: Strategy, a: int, b: int) -> int:
    """Weight elements resident on (and shipped to) the part for range [a, b)."""
    total = _weight_elems(layer)
    if total == 0:
        return 0
    op = layer.op
    if strategy in (Strategy.SplitHW, Strategy.Replicate):
        return total
    groups = layer.d("groups", 1) if op is LayerOp.Conv else 1
    if strategy is Strategy.SplitK:
        if op is LayerOp.Conv:
            return (b - a) * (layer.d("C") // groups) * layer.d("R") * layer.d("S")
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return (b - a) * layer.d("K")
        if op is LayerOp.LstmCell:
            return 4 * (b - a) * (layer.d("hidden") + layer.d("input"))
    if strategy is Strategy.SplitC:
        if op is LayerOp.Conv:
            return (b - a) * (layer.d("K") // groups) * layer.d("R") * layer.d("S")
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("M") * (b - a)
        if op is LayerOp.LstmCell:
            return 4 * layer.d("hidden") * (b - a)
    raise MappingError(f"layer {layer.id!r}: no weight slicing for {strategy.value}")


def part_macs(layer: Layer, strategy: Strategy, a: int, b: int) -> int:
    """MAC operations executed by the part computing range [a, b)."""
    total = layer_macs(layer)
    if total == 0:
        return 0
    op = layer.op
    ho, wo = out_hw(layer) if op is LayerOp.Conv else (0, 0)
    groups = layer.d("groups", 1) if op is LayerOp.Conv else 1
    if strategy is Strategy.Replicate:
        return total
    if strategy is Strategy.SplitK:
        if op is LayerOp.Conv:
            return (b - a) * (layer.d("C") // groups) * layer.d("R") * layer.d("S") * ho * wo
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return (b - a) * layer.d("K") * layer.d("N")
        if op is LayerOp.LstmCell:
            return 4 * (b - a) * (layer.d("hidden") + layer.d("input"))
    if strategy is Strategy.SplitHW:
        if op is LayerOp.Conv:
            return layer.d("K") * (layer.d("C") // groups) * layer.d("R") * layer.d("S") * (b - a) * wo
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("M") * layer.d("K") * (b - a)
    if strategy is Strategy.SplitC:
        if op is LayerOp.Conv:
            return (b - a) * (layer.d("K") // groups) * layer.d("R") * layer.d("S") * ho * wo
        if op in (LayerOp.Fc, LayerOp.Matmul):
            return layer.d("M") * (b - a) * layer.d("N")
        if op is LayerOp.LstmCell:
            return 4 * layer.d("hidden") * (b - a)
    raise MappingError(f"layer {layer.id!r}: no MAC split for {strategy.value}")


# ---------------------------------------------------------------------------
# Strategy choice and placement
# ---------------------------------------------------------------------------

def _partition(extent: int, n: int) -> list[tuple[int, int]]:
    """Balanced contiguous ranges: part i gets [i*E//n, (i+1)*E//n)."""
    return [(i * extent // n, (i + 1) * extent // n) for i in range(n)]


def _strategy_cost(layer: Layer, graph: LayerGraph | None, strategy: Strategy, n: int) -> int:
    """Bytes injected for this layer under a single-source producer view:
    weights + one payload per distinct operand need + partial-sum traffic."""
    bpe = layer.bytes_per_elem
    slots = graph.slots_of(layer) if graph is not None else operand_slots(layer)
    cost = tensor_bytes(layer, "weight")
    ranges = _partition(_split_extent(layer, strategy), n)  # type: ignore[arg-type]
    for si in range(len(slots)):
        seen: set = set()
        for a, b in ranges:
            need = slot_needs(layer, strategy, a, b, slots)[si]
            if need is None:
                continue
            key = need if need != FULL else FULL
            if key in seen:
                continue
            seen.add(key)
            cost += region_elems(need, slots[si].layout) * bpe
    if strategy is Strategy.SplitC:
        cost += (n - 1) * tensor_bytes(layer, "output")
    return cost


def choose_strategy(
    layer: Layer, n_parts: int, cfg: ArchConfig | None = None, graph: LayerGraph | None = None
) -> Strategy:
    """Pick the split minimizing injected bytes; ties prefer
    SplitK, then SplitHW, then SplitC.  A strategy is valid only when its
    split axis has at least n_parts elements."""
    if n_parts < 1:
        raise MappingError(f"layer {layer.id!r}: n_parts must be >= 1")
    best: tuple[int, int] | None = None
    best_strategy: Strategy | None = None
    for rank, strategy in enumerate((Strategy.SplitK, Strategy.SplitHW, Strategy.SplitC)):
        extent = _split_extent(layer, strategy)
        if extent is None or extent < n_parts:
            continue
        if n_parts == 1:
            return strategy  # first valid; no traffic difference with one part
        cost = _strategy_cost(layer, graph, strategy, n_parts)
        if best is None or (cost, rank) < best:
            best = (cost, rank)
            best_strategy = strategy
    if best_strategy is None:
        raise MappingError(
            f"layer {layer.id!r}: no split strategy fits {n_parts} parts "
            f"(op {layer.op.value}, dims {layer.dims})"
        )
    return best_strategy


def _regions_for(policy: MappingPolicy, graph: LayerGraph, cfg: ArchConfig) -> list[list[NodeId]]:
    """Per-layer placement regions, aligned with graph.layers order."""
    chiplets = list(cfg.compute_nodes())
    n_layers = len(graph.layers)
    if policy.kind is PolicyKind.AllChiplets:
        return [chiplets] * n_layers
    assert policy.seg_size is not None
    seg_size = min(policy.seg_size, n_layers)
    n_seg = -(-n_layers // seg_size)
    base, extra = divmod(len(chiplets), n_seg)
    if base == 0:
        raise MappingError(
            f"{n_seg} pipeline segments need at least one chiplet each "
            f"({len(chiplets)} available)"
        )
    sizes = [base] * (n_seg - extra) + [base + 1] * extra
    regions: list[list[NodeId]] = []
    start = 0
    for size in sizes:
        regions.append(chiplets[start : start + size])
        start += size
    return [regions[i // seg_size] for i in range(n_layers)]


def place_layers(
    graph: LayerGraph, cfg: ArchConfig, policy: MappingPolicy
) -> dict[str, TileAssignment]:
    """Assign every layer a strategy and a set of chiplet parts."""
    regions = _regions_for(policy, graph, cfg)
    out: dict[str, TileAssignment] = {}
    for layer, region in zip(graph.layers, regions):
        n = len(region)
        strategy = choose_strategy(layer, n, cfg, graph)
        ranges = _partition(_split_extent(layer, strategy), n)  # type: ignore[arg-type]
        parts = tuple(Part(region[i], lo, hi) for i, (lo, hi) in enumerate(ranges))
        out[layer.id] = TileAssignment(layer.id, strategy, parts)
    return out


# ---------------------------------------------------------------------------
# Message construction
# ---------------------------------------------------------------------------

def _out_region(layer: Layer, strategy: Strategy, a: int, b: int) -> Region:
    """Output slice held by the part computing range [a, b)."""
    op = layer.op
    if strategy is Strategy.SplitK:
        return ("axis", 0, a, b)
    if strategy is Strategy.SplitHW:
        if op in (LayerOp.Conv, LayerOp.Pool, LayerOp.Fc, LayerOp.Matmul):
            return ("axis", 1, a, b)
        return ("axis", 0, a, b)
    return FULL  # SplitC partials and Replicate copies are full-size


class _Emitter:
    def __init__(self) -> None:
        self.messages: list[Message] = []

    def emit(
        self,
        layer_id: str,
        msg_class: MsgClass,
        src: NodeId,
        dsts: tuple[NodeId, ...],
        nbytes: int,
        gate_layer: str | None = None,
    ) -> None:
        self.messages.append(
            Message(len(self.messages), layer_id, msg_class, src, dsts, nbytes, gate_layer)
        )


def build_messages(
    graph: LayerGraph,
    assignments: dict[str, TileAssignment],
    cfg: ArchConfig,
    *,
    reuse_ledger: dict[str, int] | None = None,
) -> list[Message]:
    """Derive the full message list for a mapped workload.

    Per layer, in topological order: weight fetches, then input activations
    (one message per producer slice and distinct consumer need, consumers
    with identical needs sharing a multicast), then partial-sum reduction
    for SplitC, then output writeback (graph exits) or spill (global buffer
    overflow).  Parts colocated with their producer reuse data locally and
    receive nothing; `reuse_ledger` (layer id -> bytes) records those bytes.
    """
    em = _Emitter()
    # producer views: layer id -> (layout, [(holder, region)], gate layer or None)
    views: dict[str, tuple[Layout, list[tuple[NodeId, Region]], str | None]] = {}

    for layer in graph.layers:
        asg = assignments.get(layer.id)
        if asg is None:
            raise MappingError(f"layer {layer.id!r} has no tile assignment")
        if asg.layer_id != layer.id:
            raise MappingError(f"assignment for {asg.layer_id!r} keyed as {layer.id!r}")
        strategy, parts = asg.strategy, asg.parts
        n = len(parts)
        idx = graph.index(layer.id)
        home = cfg.dram_home(idx)
        bpe = layer.bytes_per_elem
        slots = graph.slots_of(layer)
        needs_per_part = [slot_needs(layer, strategy, p.lo, p.hi, slots) for p in parts]

        # (a) weights
        w_total = tensor_bytes(layer, "weight")
        if w_total > 0:
            if strategy in (Strategy.SplitHW, Strategy.Replicate) and n > 1:
                em.emit(layer.id, MsgClass.Weight, home, tuple(p.chiplet for p in parts), w_total)
            else:
                for p in parts:
                    nbytes = weight_slice_elems(layer, strategy, p.lo, p.hi) * bpe
                    if nbytes > 0:
                        em.emit(layer.id, MsgClass.Weight, home, (p.chiplet,), nbytes)

        # (b) input activations, one slot at a time
        for si, slot in enumerate(slots):
            if slot.pred_index is None:
                src_layout: Layout = slot.layout
                view: list[tuple[NodeId, Region]] = [(home, FULL)]
                gate: str | None = None
                src_bpe = bpe
            else:
                pred = graph.layer(layer.preds[slot.pred_index])
                src_layout, view, gate = views[pred.id]
                src_bpe = pred.bytes_per_elem
            for src_node, src_region in view:
                groups: dict[object, tuple[int, list[NodeId]]] = {}
                order: list[object] = []
                for pi, p in enumerate(parts):
                    need = needs_per_part[pi][si]
                    if need is None:
                        continue
                    inter = intersect_regions(src_region, src_layout, need, slot.layout)
                    if inter is None:
                        continue
                    elems = region_elems(inter, src_layout)
                    if p.chiplet == src_node:
                        if reuse_ledger is not None:
                            reuse_ledger[layer.id] = (
                                reuse_ledger.get(layer.id, 0) + elems * src_bpe
                            )
                        continue
                    if inter in groups:
                        groups[inter][1].append(p.chiplet)
                    else:
                        groups[inter] = (elems, [p.chiplet])
                        order.append(inter)
                for key in order:
                    elems, chiplets = groups[key]
                    em.emit(
                        layer.id, MsgClass.InputAct, src_node, tuple(chiplets),
                        elems * src_bpe, gate_layer=gate,
                    )

        # (c) partial-sum reduction
        o_total = tensor_bytes(layer, "output")
        root = parts[0]
        if strategy is Strategy.SplitC and n > 1:
            for p in parts[1:]:
                em.emit(layer.id, MsgClass.PartialSum, p.chiplet, (root.chiplet,), o_total)

        # output holders before any spill
        if strategy is Strategy.SplitC or strategy is Strategy.Replicate:
            holders: list[tuple[NodeId, Region]] = [(root.chiplet, FULL)]
        else:
            holders = [
                (p.chiplet, _out_region(layer, strategy, p.lo, p.hi)) for p in parts
            ]

        # residency: weights + inputs + output slice must fit the global buffer
        spilled = False
        for pi, p in enumerate(parts):
            resident = weight_slice_elems(layer, strategy, p.lo, p.hi) * bpe
            for si, slot in enumerate(slots):
                need = needs_per_part[pi][si]
                if need is None:
                    continue
                if slot.pred_index is None:
                    src_bpe = bpe
                else:
                    src_bpe = graph.layer(layer.preds[slot.pred_index]).bytes_per_elem
                resident += region_elems(need, slot.layout) * src_bpe
            if strategy in (Strategy.SplitC, Strategy.Replicate):
                resident += o_total
            else:
                resident += region_elems(
                    _out_region(layer, strategy, p.lo, p.hi), out_layout(layer)
                ) * bpe
            if resident > cfg.gbuf_bytes:
                spilled = True
                break

        # (d) writeback / spill
        is_exit = not graph.succs_of(layer.id)
        out_lay = out_layout(layer)
        if is_exit:
            for node, region in holders:
                em.emit(
                    layer.id, MsgClass.OutputAct, node, (home,),
                    region_elems(region, out_lay) * bpe,
                )
            views[layer.id] = (out_lay, holders, None)
        elif spilled:
            for node, region in holders:
                em.emit(
                    layer.id, MsgClass.Spill, node, (home,),
                    region_elems(region, out_lay) * bpe,
                )
            views[layer.id] = (out_lay, [(home, FULL)], layer.id)
        else:
            views[layer.id] = (out_lay, holders, None)

    return em.messages
