"""Workload model: DNN layer graphs with per-op tensor geometry.

A workload is a DAG of layers.  Each op type declares the dimension keys it
requires and how its activation operands, weights, output, and MAC count are
derived from them.  Spatial ops use SAME padding, so an output row r of a
Conv/Pool maps to input rows [r*stride - pad_top, r*stride - pad_top + R).

Operand slots drive traffic generation: every activation operand of a layer
is either fed by a predecessor layer or, when no predecessor fills the slot,
fetched from the layer's home DRAM chiplet.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "WorkloadError",
    "LayerOp",
    "Layer",
    "LayerGraph",
    "OperandSlot",
    "load_workload",
    "parse_workload",
    "layer_macs",
    "tensor_bytes",
    "output_elems",
    "out_hw",
    "operand_slots",
    "out_layout",
]


class WorkloadError(ValueError):
    """Raised for malformed workload files or inconsistent layer graphs."""


class LayerOp(str, Enum):
    Conv = "Conv"
    Fc = "Fc"
    Pool = "Pool"
    EltwiseAdd = "EltwiseAdd"
    Concat = "Concat"
    Matmul = "Matmul"
    LstmCell = "LstmCell"
    Embedding = "Embedding"


# required and optional dimension keys per op
_SCHEMAS: dict[LayerOp, tuple[frozenset[str], frozenset[str]]] = {
    LayerOp.Conv: (frozenset({"C", "K", "R", "S", "H", "W"}), frozenset({"stride", "groups"})),
    LayerOp.Pool: (frozenset({"C", "H", "W", "window"}), frozenset({"stride"})),
    LayerOp.Fc: (frozenset({"M", "K", "N"}), frozenset()),
    LayerOp.Matmul: (frozenset({"M", "K", "N"}), frozenset()),
    LayerOp.LstmCell: (frozenset({"hidden", "input"}), frozenset()),
    LayerOp.EltwiseAdd: (frozenset({"elems"}), frozenset()),
    LayerOp.Concat: (frozenset({"elems"}), frozenset()),
    LayerOp.Embedding: (frozenset({"elems"}), frozenset()),
}


@dataclass(frozen=True, eq=True)
class Layer:
    id: str
    op: LayerOp
    dims: dict[str, int]
    preds: tuple[str, ...] = ()
    bytes_per_elem: int = 1

    def d(self, key: str, default: int | None = None) -> int:
        if default is not None:
            return int(self.dims.get(key, default))
        return int(self.dims[key])


# A tensor layout is a tuple of (axis name, extent), outermost axis first.
Layout = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class OperandSlot:
    """One activation input of a layer: its layout plus where it comes from.

    pred_index points into layer.preds; None means the slot has no producer
    in the graph and is fetched from the layer's home DRAM chiplet.
    """

    name: str
    layout: Layout
    pred_index: int | None

    @property
    def elems(self) -> int:
        n = 1
        for _, extent in self.layout:
            n *= extent
        return n


def out_hw(layer: Layer) -> tuple[int, int]:
    """Output spatial size of a Conv/Pool under SAME padding."""
    stride = layer.d("stride", 1)
    h, w = layer.d("H"), layer.d("W")
    return -(-h // stride), -(-w // stride)


def output_elems(layer: Layer) -> int:
    op = layer.op
    if op is LayerOp.Conv:
        ho, wo = out_hw(layer)
        return layer.d("K") * ho * wo
    if op is LayerOp.Pool:
        ho, wo = out_hw(layer)
        return layer.d("C") * ho * wo
    if op in (LayerOp.Fc, LayerOp.Matmul):
        return layer.d("M") * layer.d("N")
    if op is LayerOp.LstmCell:
        return layer.d("hidden")
    return layer.d("elems")


def out_layout(layer: Layer) -> Layout:
    """Canonical layout of the layer's output tensor (outermost axis first)."""
    op = layer.op
    if op is LayerOp.Conv:
        ho, wo = out_hw(layer)
        return (("chan", layer.d("K")), ("row", ho), ("col", wo))
    if op is LayerOp.Pool:
        ho, wo = out_hw(layer)
        return (("chan", layer.d("C")), ("row", ho), ("col", wo))
    if op in (LayerOp.Fc, LayerOp.Matmul):
        return (("row", layer.d("M")), ("col", layer.d("N")))
    if op is LayerOp.LstmCell:
        return (("feat", layer.d("hidden")),)
    return (("flat", layer.d("elems")),)


def _weight_elems(layer: Layer) -> int:
    op = layer.op
    if op is LayerOp.Conv:
        groups = layer.d("groups", 1)
        return layer.d("K") * (layer.d("C") // groups) * layer.d("R") * layer.d("S")
    if op is LayerOp.Fc:
        return layer.d("M") * layer.d("K")
    if op is LayerOp.Matmul:
        return 0 if len(layer.preds) == 2 else layer.d("M") * layer.d("K")
    if op is LayerOp.LstmCell:
        return 4 * layer.d("hidden") * (layer.d("hidden") + layer.d("input"))
    return 0


def layer_macs(layer: Layer) -> int:
    op = layer.op
    if op is LayerOp.Conv:
        ho, wo = out_hw(layer)
        groups = layer.d("groups", 1)
        return layer.d("K") * (layer.d("C") // groups) * layer.d("R") * layer.d("S") * ho * wo
    if op in (LayerOp.Fc, LayerOp.Matmul):
        return layer.d("M") * layer.d("K") * layer.d("N")
    if op is LayerOp.LstmCell:
        return 4 * layer.d("hidden") * (layer.d("hidden") + layer.d("input"))
    return 0


def operand_slots(layer: Layer, pred_elems: Iterable[int] | None = None) -> tuple[OperandSlot, ...]:
    """Activation operand slots of a layer, with predecessor assignment.

    pred_elems gives output_elems of each predecessor (needed to bind
    LstmCell's x/h slots by size); when omitted, slots bind positionally,
    which is only correct for ops whose slot order equals pred order.
    """
    op = layer.op
    np_ = len(layer.preds)
    if op in (LayerOp.Conv, LayerOp.Pool):
        layout: Layout = (("chan", layer.d("C")), ("row", layer.d("H")), ("col", layer.d("W")))
        return (OperandSlot("x", layout, 0 if np_ else None),)
    if op is LayerOp.Fc:
        layout = (("k", layer.d("K")), ("col", layer.d("N")))
        return (OperandSlot("x", layout, 0 if np_ else None),)
    if op is LayerOp.Matmul:
        moving: Layout = (("k", layer.d("K")), ("col", layer.d("N")))
        if np_ == 2:
            stationary: Layout = (("row", layer.d("M")), ("k", layer.d("K")))
            return (OperandSlot("a", stationary, 0), OperandSlot("b", moving, 1))
        return (OperandSlot("b", moving, 0 if np_ else None),)
    if op is LayerOp.LstmCell:
        x_layout: Layout = (("feat", layer.d("input")),)
        h_layout: Layout = (("feat", layer.d("hidden")),)
        x_src: int | None = None
        h_src: int | None = None
        if pred_elems is None:
            if np_ >= 1:
                x_src = 0
            if np_ >= 2:
                h_src = 1
        else:
            sizes = list(pred_elems)
            for i, n in enumerate(sizes):
                if x_src is None and n == layer.d("input"):
                    x_src = i
                elif h_src is None and n == layer.d("hidden"):
                    h_src = i
                else:
                    raise WorkloadError(
                        f"layer {layer.id!r}: predecessor {layer.preds[i]!r} with {n} elems "
                        f"matches neither input ({layer.d('input')}) nor hidden "
                        f"({layer.d('hidden')}) slot"
                    )
        return (OperandSlot("x", x_layout, x_src), OperandSlot("h", h_layout, h_src))
    if op is LayerOp.EltwiseAdd:
        e = layer.d("elems")
        return (
            OperandSlot("in0", (("flat", e),), 0 if np_ >= 1 else None),
            OperandSlot("in1", (("flat", e),), 1 if np_ >= 2 else None),
        )
    if op is LayerOp.Concat:
        if pred_elems is None:
            raise WorkloadError(f"layer {layer.id!r}: Concat slots need predecessor sizes")
        return tuple(
            OperandSlot(f"in{i}", (("flat", n),), i) for i, n in enumerate(pred_elems)
        )
    # Embedding: one flat slot (token stream / table rows), DRAM-fed at entry
    return (OperandSlot("x", (("flat", layer.d("elems")),), 0 if np_ else None),)


def tensor_bytes(layer: Layer, which: str) -> int:
    """Total bytes of one tensor class of a layer: Input, Output, or Weight."""
    kind = which.lower()
    if kind == "output":
        return output_elems(layer) * layer.bytes_per_elem
    if kind == "weight":
        return _weight_elems(layer) * layer.bytes_per_elem
    if kind == "input":
        if layer.op is LayerOp.Concat:
            # slot extents equal predecessor outputs, which sum to elems
            return layer.d("elems") * layer.bytes_per_elem
        total = 0
        for slot in operand_slots(layer):
            total += slot.elems
        return total * layer.bytes_per_elem
    raise WorkloadError(f"unknown tensor class {which!r} (expected Input/Output/Weight)")


@dataclass(frozen=True)
class LayerGraph:
    """A validated workload: layers in deterministic topological order."""

    name: str
    layers: tuple[Layer, ...]
    _index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)
    _succs: dict[str, tuple[str, ...]] = field(repr=False, compare=False, default_factory=dict)

    def layer(self, layer_id: str) -> Layer:
        return self.layers[self._index[layer_id]]

    def index(self, layer_id: str) -> int:
        """Position in topological order; used for round-robin DRAM homes."""
        return self._index[layer_id]

    def preds_of(self, layer: Layer) -> tuple[Layer, ...]:
        return tuple(self.layer(p) for p in layer.preds)

    def succs_of(self, layer_id: str) -> tuple[str, ...]:
        return self._succs.get(layer_id, ())

    def entries(self) -> tuple[Layer, ...]:
        return tuple(l for l in self.layers if not l.preds)

    def exits(self) -> tuple[Layer, ...]:
        return tuple(l for l in self.layers if not self._succs.get(l.id))

    def slots_of(self, layer: Layer) -> tuple[OperandSlot, ...]:
        pred_sizes = [output_elems(self.layer(p)) for p in layer.preds]
        return operand_slots(layer, pred_sizes)


def _check_dims(layer: Layer) -> None:
    required, optional = _SCHEMAS[layer.op]
    keys = set(layer.dims)
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise WorkloadError(f"layer {layer.id!r}: missing dims {sorted(missing)}")
    if unknown:
        raise WorkloadError(f"layer {layer.id!r}: unknown dims {sorted(unknown)}")
    for key, value in layer.dims.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise WorkloadError(f"layer {layer.id!r}: dim {key} must be a positive int")
    if layer.op is LayerOp.Conv:
        groups = layer.d("groups", 1)
        if layer.d("C") % groups or layer.d("K") % groups:
            raise WorkloadError(f"layer {layer.id!r}: groups must divide C and K")


def _check_preds(graph_layers: dict[str, Layer], layer: Layer) -> None:
    op = layer.op
    np_ = len(layer.preds)
    limits = {
        LayerOp.Conv: (0, 1), LayerOp.Pool: (0, 1), LayerOp.Fc: (0, 1),
        LayerOp.Matmul: (0, 2), LayerOp.LstmCell: (0, 2),
        LayerOp.EltwiseAdd: (2, 2), LayerOp.Concat: (2, None),
        LayerOp.Embedding: (0, 1),
    }
    lo, hi = limits[op]
    if np_ < lo or (hi is not None and np_ > hi):
        raise WorkloadError(f"layer {layer.id!r}: {op.value} takes {lo}..{hi or 'n'} preds, got {np_}")
    pred_sizes = [output_elems(graph_layers[p]) for p in layer.preds]
    if op is LayerOp.Concat:
        if sum(pred_sizes) != layer.d("elems"):
            raise WorkloadError(
                f"layer {layer.id!r}: predecessor outputs sum to {sum(pred_sizes)}, "
                f"expected elems={layer.d('elems')}"
            )
        return
    # binds slots and validates sizes; LstmCell binding raises on mismatch
    slots = operand_slots(layer, pred_sizes)
    by_pred = {s.pred_index: s for s in slots if s.pred_index is not None}
    for i, size in enumerate(pred_sizes):
        slot = by_pred.get(i)
        if slot is None:
            raise WorkloadError(f"layer {layer.id!r}: predecessor {layer.preds[i]!r} fills no slot")
        if slot.elems != size:
            raise WorkloadError(
                f"layer {layer.id!r}: slot {slot.name} expects {slot.elems} elems, "
                f"predecessor {layer.preds[i]!r} produces {size}"
            )


def _toposort(layers: list[Layer]) -> list[Layer]:
    """Kahn's algorithm, stable by original position; raises on cycles."""
    pos = {l.id: i for i, l in enumerate(layers)}
    indeg = {l.id: 0 for l in layers}
    succs: dict[str, list[str]] = {l.id: [] for l in layers}
    for l in layers:
        for p in set(l.preds):
            succs[p].append(l.id)
        indeg[l.id] = len(set(l.preds))
    ready = [pos[l.id] for l in layers if indeg[l.id] == 0]
    heapq.heapify(ready)
    order: list[Layer] = []
    while ready:
        i = heapq.heappop(ready)
        layer = layers[i]
        order.append(layer)
        for s in succs[layer.id]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, pos[s])
    if len(order) != len(layers):
        stuck = min((l.id for l in layers if indeg[l.id] > 0), key=lambda i: pos[i])
        raise WorkloadError(f"cycle in layer graph involving layer {stuck!r}")
    return order


def parse_workload(obj: Mapping[str, object], default_name: str = "workload") -> LayerGraph:
    """Build a validated LayerGraph from a decoded workload JSON object."""
    if not isinstance(obj, Mapping):
        raise WorkloadError("workload must be a JSON object")
    unknown = set(obj) - {"name", "bytes_per_elem", "layers"}
    if unknown:
        raise WorkloadError(f"unknown workload keys {sorted(unknown)}")
    name = obj.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise WorkloadError("workload name must be a non-empty string")
    default_bpe = obj.get("bytes_per_elem", 1)
    if not isinstance(default_bpe, int) or default_bpe < 1:
        raise WorkloadError("bytes_per_elem must be a positive int")
    raw_layers = obj.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise WorkloadError("workload needs a non-empty 'layers' list")

    layers: list[Layer] = []
    seen: set[str] = set()
    for entry in raw_layers:
        if not isinstance(entry, Mapping):
            raise WorkloadError("each layer must be a JSON object")
        unknown = set(entry) - {"id", "op", "dims", "preds", "bytes_per_elem"}
        if unknown:
            raise WorkloadError(f"layer {entry.get('id')!r}: unknown keys {sorted(unknown)}")
        lid = entry.get("id")
        if not isinstance(lid, str) or not lid:
            raise WorkloadError("every layer needs a non-empty string id")
        if lid in seen:
            raise WorkloadError(f"duplicate layer id {lid!r}")
        seen.add(lid)
        op_name = entry.get("op")
        try:
            op = LayerOp(op_name)
        except ValueError:
            raise WorkloadError(f"layer {lid!r}: unknown op {op_name!r}") from None
        dims = entry.get("dims")
        if not isinstance(dims, Mapping):
            raise WorkloadError(f"layer {lid!r}: dims must be an object")
        preds = entry.get("preds", [])
        if not isinstance(preds, list) or not all(isinstance(p, str) for p in preds):
            raise WorkloadError(f"layer {lid!r}: preds must be a list of layer ids")
        bpe = entry.get("bytes_per_elem", default_bpe)
        if not isinstance(bpe, int) or bpe < 1:
            raise WorkloadError(f"layer {lid!r}: bytes_per_elem must be a positive int")
        layers.append(Layer(lid, op, dict(dims), tuple(preds), bpe))

    by_id = {l.id: l for l in layers}
    for layer in layers:
        _check_dims(layer)
        for p in layer.preds:
            if p == layer.id:
                raise WorkloadError(f"layer {layer.id!r}: self-loop")
            if p not in by_id:
                raise WorkloadError(f"layer {layer.id!r}: unknown predecessor {p!r}")
    ordered = _toposort(layers)
    for layer in ordered:
        _check_preds(by_id, layer)

    succs: dict[str, list[str]] = {}
    for layer in ordered:
        for p in layer.preds:
            succs.setdefault(p, []).append(layer.id)
    return LayerGraph(
        name=name,
        layers=tuple(ordered),
        _index={l.id: i for i, l in enumerate(ordered)},
        _succs={k: tuple(v) for k, v in succs.items()},
    )


def load_workload(path: str | Path) -> LayerGraph:
    """Load and validate a workload JSON file."""
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"{p}: invalid JSON ({exc})") from exc
    return parse_workload(obj, default_name=p.stem)
