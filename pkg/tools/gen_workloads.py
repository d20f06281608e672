#!/usr/bin/env python3
"""Generate the bundled workload JSON files.

Each builder constructs one network as a layer DAG using the workload schema
(batch 1, int8 activations).  Spatial bookkeeping (feature-map sizes through
strided layers) lives here, in the generator, so the emitted files are plain
and self-contained.  Run from the repository root:

    python tools/gen_workloads.py [out_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "chiplet_lab" / "workloads"


class Net:
    """Tiny builder for workload JSON objects."""

    def __init__(self, name: str):
        self.name = name
        self.layers: list[dict] = []
        self._n = 0

    def add(self, op: str, dims: dict, preds: list[str] | None = None, tag: str = "") -> str:
        self._n += 1
        lid = f"{tag or op.lower()}{self._n}"
        entry: dict = {"id": lid, "op": op, "dims": dims}
        if preds:
            entry["preds"] = preds
        self.layers.append(entry)
        return lid

    def conv(self, pred: str | None, c: int, k: int, r: int, h: int,
             stride: int = 1, groups: int = 1, tag: str = "conv") -> tuple[str, int]:
        dims = {"C": c, "K": k, "R": r, "S": r, "H": h, "W": h, "stride": stride}
        if groups != 1:
            dims["groups"] = groups
        lid = self.add("Conv", dims, [pred] if pred else None, tag)
        return lid, -(-h // stride)

    def pool(self, pred: str, c: int, h: int, window: int, stride: int,
             tag: str = "pool") -> tuple[str, int]:
        lid = self.add(
            "Pool", {"C": c, "H": h, "W": h, "window": window, "stride": stride},
            [pred], tag,
        )
        return lid, -(-h // stride)

    def to_json(self) -> dict:
        return {"name": self.name, "bytes_per_elem": 1, "layers": self.layers}

    def write(self, out_dir: Path) -> None:
        path = out_dir / f"{self.name}.json"
        path.write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(self.layers)} layers)")


# ---------------------------------------------------------------------------
# Residual CNNs
# ---------------------------------------------------------------------------

def resnet(name: str, blocks: list[int], mid_scale: int = 1, groups: int = 1) -> Net:
    """ResNet-style bottleneck network (50/101/152 and the grouped variant)."""
    net = Net(name)
    conv1, h = net.conv(None, 3, 64, 7, 224, stride=2)
    x, h = net.pool(conv1, 64, h, 3, 2)
    in_c = 64
    for stage, n_blocks in enumerate(blocks):
        mid = 64 * (2 ** stage) * mid_scale
        out_c = 256 * (2 ** stage)
        for b in range(n_blocks):
            stride = 2 if (stage > 0 and b == 0) else 1
            c1, _ = net.conv(x, in_c, mid, 1, h)
            c2, h2 = net.conv(c1, mid, mid, 3, h, stride=stride, groups=groups)
            c3, _ = net.conv(c2, mid, out_c, 1, h2)
            if in_c != out_c or stride != 1:
                sc, _ = net.conv(x, in_c, out_c, 1, h, stride=stride, tag="down")
            else:
                sc = x
            x = net.add("EltwiseAdd", {"elems": out_c * h2 * h2}, [c3, sc], "add")
            h = h2
            in_c = out_c
    x, h = net.pool(x, in_c, h, h, h, tag="gap")
    net.add("Fc", {"M": 1000, "K": in_c, "N": 1}, [x], "fc")
    return net


def densenet(name: str, blocks: list[int], growth: int = 32) -> Net:
    net = Net(name)
    conv1, h = net.conv(None, 3, 2 * growth, 7, 224, stride=2)
    x, h = net.pool(conv1, 2 * growth, h, 3, 2)
    channels = 2 * growth
    feats: list[tuple[str, int]] = [(x, channels)]
    for bi, n_layers in enumerate(blocks):
        for _ in range(n_layers):
            if len(feats) > 1:
                total_c = sum(c for _, c in feats)
                cat = net.add(
                    "Concat", {"elems": total_c * h * h}, [f for f, _ in feats], "cat"
                )
            else:
                cat, total_c = feats[0]
            b1, _ = net.conv(cat, total_c, 4 * growth, 1, h)
            b2, _ = net.conv(b1, 4 * growth, growth, 3, h)
            feats.append((b2, growth))
        total_c = sum(c for _, c in feats)
        cat = net.add("Concat", {"elems": total_c * h * h}, [f for f, _ in feats], "cat")
        if bi < len(blocks) - 1:
            tr, _ = net.conv(cat, total_c, total_c // 2, 1, h, tag="trans")
            pooled, h = net.pool(tr, total_c // 2, h, 2, 2)
            feats = [(pooled, total_c // 2)]
        else:
            x, h = net.pool(cat, total_c, h, h, h, tag="gap")
            net.add("Fc", {"M": 1000, "K": total_c, "N": 1}, [x], "fc")
    return net


def darknet19() -> Net:
    net = Net("darknet19")
    h = 224
    x: str | None = None
    c = 3
    plan: list[object] = [
        32, "p", 64, "p", 128, (64, 1), 128, "p", 256, (128, 1), 256, "p",
        512, (256, 1), 512, (256, 1), 512, "p", 1024, (512, 1), 1024, (512, 1), 1024,
    ]
    for item in plan:
        if item == "p":
            x, h = net.pool(x, c, h, 2, 2)  # type: ignore[arg-type]
        else:
            k, r = item if isinstance(item, tuple) else (item, 3)
            x, h = net.conv(x, c, k, r, h)
            c = k
    x, _ = net.conv(x, c, 1000, 1, h, tag="head")
    net.pool(x, 1000, h, h, h, tag="gap")
    return net


def googlenet() -> Net:
    net = Net("googlenet")
    c1, h = net.conv(None, 3, 64, 7, 224, stride=2)
    x, h = net.pool(c1, 64, h, 3, 2)
    c2, _ = net.conv(x, 64, 64, 1, h)
    c3, _ = net.conv(c2, 64, 192, 3, h)
    x, h = net.pool(c3, 192, h, 3, 2)
    c = 192
    # (b1, b3r, b3, b5r, b5, pp) with an optional trailing "p" for a 2x pool
    modules: list[tuple] = [
        (64, 96, 128, 16, 32, 32), (128, 128, 192, 32, 96, 64), ("p",),
        (192, 96, 208, 16, 48, 64), (160, 112, 224, 24, 64, 64),
        (128, 128, 256, 24, 64, 64), (112, 144, 288, 32, 64, 64),
        (256, 160, 320, 32, 128, 128), ("p",),
        (256, 160, 320, 32, 128, 128), (384, 192, 384, 48, 128, 128),
    ]
    for mod in modules:
        if mod == ("p",):
            x, h = net.pool(x, c, h, 3, 2)
            continue
        b1, b3r, b3, b5r, b5, pp = mod
        o1, _ = net.conv(x, c, b1, 1, h)
        r3, _ = net.conv(x, c, b3r, 1, h)
        o3, _ = net.conv(r3, b3r, b3, 3, h)
        r5, _ = net.conv(x, c, b5r, 1, h)
        o5, _ = net.conv(r5, b5r, b5, 5, h)
        mp, _ = net.pool(x, c, h, 3, 1)
        op, _ = net.conv(mp, c, pp, 1, h)
        c = b1 + b3 + b5 + pp
        x = net.add("Concat", {"elems": c * h * h}, [o1, o3, o5, op], "cat")
    x, h = net.pool(x, c, h, h, h, tag="gap")
    net.add("Fc", {"M": 1000, "K": c, "N": 1}, [x], "fc")
    return net


def ires() -> Net:
    """Inception blocks with residual connections."""
    net = Net("ires")
    c1, h = net.conv(None, 3, 32, 3, 224, stride=2)
    c2, _ = net.conv(c1, 32, 32, 3, h)
    c3, _ = net.conv(c2, 32, 64, 3, h)
    x, h = net.pool(c3, 64, h, 3, 2)
    c4, _ = net.conv(x, 64, 80, 1, h)
    c5, _ = net.conv(c4, 80, 192, 3, h)
    x, h = net.pool(c5, 192, h, 3, 2)
    x, _ = net.conv(x, 192, 256, 1, h, tag="widen")
    c = 256

    def block_a(x: str) -> str:
        a1, _ = net.conv(x, c, 32, 1, h)
        a2r, _ = net.conv(x, c, 32, 1, h)
        a2, _ = net.conv(a2r, 32, 32, 3, h)
        a3r, _ = net.conv(x, c, 32, 1, h)
        a3a, _ = net.conv(a3r, 32, 32, 3, h)
        a3, _ = net.conv(a3a, 32, 32, 3, h)
        cat = net.add("Concat", {"elems": 96 * h * h}, [a1, a2, a3], "cat")
        lin, _ = net.conv(cat, 96, c, 1, h, tag="lin")
        return net.add("EltwiseAdd", {"elems": c * h * h}, [lin, x], "add")

    for _ in range(3):
        x = block_a(x)
    # reduction to 14x14
    r1, h2 = net.conv(x, c, 384, 3, h, stride=2, tag="red")
    r2a, _ = net.conv(x, c, 192, 1, h)
    r2b, _ = net.conv(r2a, 192, 192, 3, h)
    r2, _ = net.conv(r2b, 192, 256, 3, h, stride=2, tag="red")
    rp, _ = net.pool(x, c, h, 2, 2, tag="redpool")
    h = h2
    c = 384 + 256 + 256
    x = net.add("Concat", {"elems": c * h * h}, [r1, r2, rp], "cat")

    def block_b(x: str) -> str:
        b1, _ = net.conv(x, c, 128, 1, h)
        b2r, _ = net.conv(x, c, 128, 1, h)
        b2, _ = net.conv(b2r, 128, 128, 3, h)
        cat = net.add("Concat", {"elems": 256 * h * h}, [b1, b2], "cat")
        lin, _ = net.conv(cat, 256, c, 1, h, tag="lin")
        return net.add("EltwiseAdd", {"elems": c * h * h}, [lin, x], "add")

    for _ in range(4):
        x = block_b(x)
    x, h = net.pool(x, c, h, h, h, tag="gap")
    net.add("Fc", {"M": 1000, "K": c, "N": 1}, [x], "fc")
    return net


# ---------------------------------------------------------------------------
# Sequence models
# ---------------------------------------------------------------------------

def lstm_net() -> Net:
    net = Net("lstm")
    hidden, t_steps = 512, 25
    outs: list[str] = []
    h_prev: dict[int, str] = {}
    for t in range(t_steps):
        x = net.add("Embedding", {"elems": hidden}, None, f"emb_t{t}_")
        for layer in range(2):
            preds = [x] + ([h_prev[layer]] if layer in h_prev else [])
            x = net.add(
                "LstmCell", {"hidden": hidden, "input": hidden}, preds,
                f"l{layer}_t{t}_",
            )
            h_prev[layer] = x
        outs.append(x)
    cat = net.add("Concat", {"elems": hidden * t_steps}, outs, "cat")
    net.add("Fc", {"M": 4096, "K": hidden, "N": t_steps}, [cat], "proj")
    return net


def gnmt() -> Net:
    net = Net("gnmt")
    hidden, t_steps, depth = 1024, 12, 4
    # encoder
    enc_h: dict[int, str] = {}
    enc_top: list[str] = []
    for t in range(t_steps):
        x = net.add("Embedding", {"elems": hidden}, None, f"eemb_t{t}_")
        for layer in range(depth):
            preds = [x] + ([enc_h[layer]] if layer in enc_h else [])
            x = net.add(
                "LstmCell", {"hidden": hidden, "input": hidden}, preds,
                f"enc{layer}_t{t}_",
            )
            enc_h[layer] = x
        enc_top.append(x)
    memory = net.add("Concat", {"elems": hidden * t_steps}, enc_top, "memory")
    # decoder with attention over the encoder memory
    dec_h: dict[int, str] = {}
    dec_out: list[str] = []
    for t in range(t_steps):
        x = net.add("Embedding", {"elems": hidden}, None, f"demb_t{t}_")
        preds = [x] + ([dec_h[0]] if 0 in dec_h else [])
        q = net.add("LstmCell", {"hidden": hidden, "input": hidden}, preds, f"dec0_t{t}_")
        dec_h[0] = q
        scores = net.add(
            "Matmul", {"M": t_steps, "K": hidden, "N": 1}, [memory, q], f"att_t{t}_"
        )
        ctx = net.add(
            "Matmul", {"M": hidden, "K": t_steps, "N": 1}, [memory, scores], f"ctx_t{t}_"
        )
        x = net.add("EltwiseAdd", {"elems": hidden}, [q, ctx], f"mix_t{t}_")
        for layer in range(1, depth):
            preds = [x] + ([dec_h[layer]] if layer in dec_h else [])
            x = net.add(
                "LstmCell", {"hidden": hidden, "input": hidden}, preds,
                f"dec{layer}_t{t}_",
            )
            dec_h[layer] = x
        dec_out.append(x)
    cat = net.add("Concat", {"elems": hidden * t_steps}, dec_out, "cat")
    net.add("Fc", {"M": 4096, "K": hidden, "N": t_steps}, [cat], "proj")
    return net


def transformer(name: str, n_blocks: int, seq: int = 64, d: int = 512, ffn: int = 2048) -> Net:
    net = Net(name)
    x = net.add("Embedding", {"elems": seq * d}, None, "emb")
    for b in range(n_blocks):
        q = net.add("Fc", {"M": d, "K": d, "N": seq}, [x], f"q{b}_")
        k = net.add("Fc", {"M": d, "K": d, "N": seq}, [x], f"k{b}_")
        v = net.add("Fc", {"M": d, "K": d, "N": seq}, [x], f"v{b}_")
        scores = net.add("Matmul", {"M": seq, "K": d, "N": seq}, [q, k], f"att{b}_")
        attn = net.add("Matmul", {"M": seq, "K": seq, "N": d}, [scores, v], f"attv{b}_")
        proj = net.add("Fc", {"M": d, "K": d, "N": seq}, [attn], f"proj{b}_")
        x = net.add("EltwiseAdd", {"elems": seq * d}, [x, proj], f"add{b}a_")
        f1 = net.add("Fc", {"M": ffn, "K": d, "N": seq}, [x], f"ffn{b}a_")
        f2 = net.add("Fc", {"M": d, "K": ffn, "N": seq}, [f1], f"ffn{b}b_")
        x = net.add("EltwiseAdd", {"elems": seq * d}, [x, f2], f"add{b}b_")
    return net


def build_all() -> list[Net]:
    return [
        resnet("resnet50", [3, 4, 6, 3]),
        resnet("resnet101", [3, 4, 23, 3]),
        resnet("resnet152", [3, 8, 36, 3]),
        resnet("resnext50", [3, 4, 6, 3], mid_scale=2, groups=32),
        densenet("densenet", [6, 12, 24, 16]),
        darknet19(),
        googlenet(),
        ires(),
        lstm_net(),
        gnmt(),
        transformer("tf", 6),
        transformer("tf_cell", 1),
    ]


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else OUT_DIR
    out_dir.mkdir(parents=True, exist_ok=True)
    for net in build_all():
        net.write(out_dir)


if __name__ == "__main__":
    main()
