"""Pure-Python scheduling kernels.

Reference implementation of the two hot loops behind netsim.simulate: bulk
XY multicast-tree construction and the greedy bandwidth-contention scheduler.
chiplet_lab._kernels is a compiled drop-in replacement; both must produce
bit-identical outputs, so everything here is integer arithmetic over flat
arrays and the iteration orders are fixed.

Link ids encode directed mesh links: (y * W + x) * 4 + dir with
dir 0 = +x, 1 = -x, 2 = +y, 3 = -y.
"""

from __future__ import annotations

import heapq

import numpy as np

BACKEND = "pure"


def build_trees(
    width: int,
    height: int,
    srcs: np.ndarray,
    dsts_flat: np.ndarray,
    dsts_off: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Union-of-XY-paths trees for a batch of messages.

    Nodes are grid indices (y * W + x).  Returns (links_flat, links_off,
    hops, max_depth): per-message directed link ids in deterministic walk
    order, CSR offsets, tree link counts, and the longest src->dst Manhattan
    distance.
    """
    n = len(srcs)
    src_list = srcs.tolist()
    dst_list = dsts_flat.tolist()
    off_list = dsts_off.tolist()
    stamp = [0] * (width * height * 4)
    links: list[int] = []
    links_off = [0] * (n + 1)
    hops = [0] * n
    depth = [0] * n
    for m in range(n):
        s = src_list[m]
        sx, sy = s % width, s // width
        tag = m + 1
        dmax = 0
        for di in range(off_list[m], off_list[m + 1]):
            d = dst_list[di]
            dx, dy = d % width, d // width
            dist = abs(dx - sx) + abs(dy - sy)
            if dist > dmax:
                dmax = dist
            x, y = sx, sy
            while x != dx:
                if x < dx:
                    link = (y * width + x) * 4
                    x += 1
                else:
                    link = (y * width + x) * 4 + 1
                    x -= 1
                if stamp[link] != tag:
                    stamp[link] = tag
                    links.append(link)
            while y != dy:
                if y < dy:
                    link = (y * width + x) * 4 + 2
                    y += 1
                else:
                    link = (y * width + x) * 4 + 3
                    y -= 1
                if stamp[link] != tag:
                    stamp[link] = tag
                    links.append(link)
        links_off[m + 1] = len(links)
        hops[m] = links_off[m + 1] - links_off[m]
        depth[m] = dmax
    return (
        np.asarray(links, dtype=np.int64),
        np.asarray(links_off, dtype=np.int64),
        np.asarray(hops, dtype=np.int32),
        np.asarray(depth, dtype=np.int32),
    )


def run_schedule(
    n_links_total: int,
    links_flat: np.ndarray,
    links_off: np.ndarray,
    ser: np.ndarray,
    lat: np.ndarray,
    kind: np.ndarray,
    msg_layer: np.ndarray,
    gates_init: np.ndarray,
    deliver_flat: np.ndarray,
    deliver_off: np.ndarray,
    part_layer: np.ndarray,
    part_dur: np.ndarray,
    part_in_count: np.ndarray,
    part_ps_flat: np.ndarray,
    part_ps_off: np.ndarray,
    layer_parts_off: np.ndarray,
    layer_dep_count: np.ndarray,
    layer_dep_msgs_flat: np.ndarray,
    layer_dep_msgs_off: np.ndarray,
    layer_out_msgs_flat: np.ndarray,
    layer_out_msgs_off: np.ndarray,
    layer_ps_count: np.ndarray,
    layer_succs_flat: np.ndarray,
    layer_succs_off: np.ndarray,
    spill_waiters_flat: np.ndarray,
    spill_waiters_off: np.ndarray,
) -> dict:
    """Greedy sequential scheduler over per-link bandwidth reservations.

    Messages become eligible when their gates fire (layer dependency, spill
    landing, sender part finishing, or layer completion); the heap pops the
    lowest (eligibility, id), reserves every tree link for the serialization
    window, and the arrival triggers compute progress, which fires further
    gates.  Every newly fired gate time strictly exceeds the popped
    eligibility, so pops are nondecreasing and per-link order is FIFO.
    """
    n_msgs = len(ser)
    n_parts = len(part_layer)
    n_layers = len(layer_dep_count)

    links_flat_l = links_flat.tolist()
    links_off_l = links_off.tolist()
    ser_l = ser.tolist()
    lat_l = lat.tolist()
    kind_l = kind.tolist()
    msg_layer_l = msg_layer.tolist()
    deliver_flat_l = deliver_flat.tolist()
    deliver_off_l = deliver_off.tolist()
    part_layer_l = part_layer.tolist()
    part_dur_l = part_dur.tolist()
    part_ps_flat_l = part_ps_flat.tolist()
    part_ps_off_l = part_ps_off.tolist()
    layer_parts_off_l = layer_parts_off.tolist()
    layer_dep_msgs_flat_l = layer_dep_msgs_flat.tolist()
    layer_dep_msgs_off_l = layer_dep_msgs_off.tolist()
    layer_out_msgs_flat_l = layer_out_msgs_flat.tolist()
    layer_out_msgs_off_l = layer_out_msgs_off.tolist()
    layer_succs_flat_l = layer_succs_flat.tolist()
    layer_succs_off_l = layer_succs_off.tolist()
    spill_waiters_flat_l = spill_waiters_flat.tolist()
    spill_waiters_off_l = spill_waiters_off.tolist()

    gates_left = gates_init.tolist()
    msg_elig = [0] * n_msgs
    start = [0] * n_msgs
    end = [0] * n_msgs
    scheduled = [False] * n_msgs

    part_in_left = part_in_count.tolist()
    part_ready = [0] * n_parts
    part_dep_ok = [False] * n_parts
    part_done = [False] * n_parts
    part_end = [0] * n_parts

    layer_live = [layer_parts_off_l[i + 1] - layer_parts_off_l[i] for i in range(n_layers)]
    layer_dep_left = layer_dep_count.tolist()
    layer_dep_time = [0] * n_layers
    layer_ps_left = layer_ps_count.tolist()
    layer_out_left = [
        layer_out_msgs_off_l[i + 1] - layer_out_msgs_off_l[i] for i in range(n_layers)
    ]
    layer_out_max = [0] * n_layers
    layer_cmax = [0] * n_layers
    layer_done = [False] * n_layers
    layer_complete = [0] * n_layers

    link_free = [0] * n_links_total
    link_busy = [0] * n_links_total
    busy_nop = 0
    n_done_layers = 0
    n_scheduled = 0

    heap: list[tuple[int, int]] = []
    stack_parts: list[int] = []
    stack_layers: list[int] = []

    def fire_gate(m: int, t: int) -> None:
        if t > msg_elig[m]:
            msg_elig[m] = t
        gates_left[m] -= 1
        if gates_left[m] == 0:
            heapq.heappush(heap, (msg_elig[m], m))

    def try_finish(p: int) -> None:
        if part_dep_ok[p] and part_in_left[p] == 0 and not part_done[p]:
            part_done[p] = True
            part_end[p] = part_ready[p] + part_dur_l[p]
            stack_parts.append(p)

    def layer_dep_fire(layer: int, t: int) -> None:
        for i in range(layer_dep_msgs_off_l[layer], layer_dep_msgs_off_l[layer + 1]):
            fire_gate(layer_dep_msgs_flat_l[i], t)
        for p in range(layer_parts_off_l[layer], layer_parts_off_l[layer + 1]):
            if t > part_ready[p]:
                part_ready[p] = t
            part_dep_ok[p] = True
            try_finish(p)

    def drain() -> None:
        nonlocal n_done_layers
        while stack_parts or stack_layers:
            while stack_parts:
                p = stack_parts.pop()
                t = part_end[p]
                layer = part_layer_l[p]
                for i in range(part_ps_off_l[p], part_ps_off_l[p + 1]):
                    fire_gate(part_ps_flat_l[i], t)
                layer_live[layer] -= 1
                if t > layer_cmax[layer]:
                    layer_cmax[layer] = t
                if layer_live[layer] == 0 and layer_ps_left[layer] == 0 and not layer_done[layer]:
                    layer_done[layer] = True
                    stack_layers.append(layer)
            while stack_layers:
                layer = stack_layers.pop()
                t = layer_cmax[layer]
                layer_complete[layer] = t
                n_done_layers += 1
                for i in range(layer_out_msgs_off_l[layer], layer_out_msgs_off_l[layer + 1]):
                    fire_gate(layer_out_msgs_flat_l[i], t)
                for i in range(layer_succs_off_l[layer], layer_succs_off_l[layer + 1]):
                    s = layer_succs_flat_l[i]
                    layer_dep_left[s] -= 1
                    if t > layer_dep_time[s]:
                        layer_dep_time[s] = t
                    if layer_dep_left[s] == 0:
                        layer_dep_fire(s, layer_dep_time[s])

    for layer in range(n_layers):
        if layer_dep_left[layer] == 0:
            layer_dep_fire(layer, 0)
    drain()

    while heap:
        elig, m = heapq.heappop(heap)
        t0 = elig
        for i in range(links_off_l[m], links_off_l[m + 1]):
            f = link_free[links_flat_l[i]]
            if f > t0:
                t0 = f
        s_m = ser_l[m]
        t_free = t0 + s_m
        for i in range(links_off_l[m], links_off_l[m + 1]):
            link = links_flat_l[i]
            link_free[link] = t_free
            link_busy[link] += s_m
        busy_nop += (links_off_l[m + 1] - links_off_l[m]) * s_m
        start[m] = t0
        arrive = t0 + lat_l[m]
        end[m] = arrive
        scheduled[m] = True
        n_scheduled += 1

        for i in range(deliver_off_l[m], deliver_off_l[m + 1]):
            p = deliver_flat_l[i]
            if arrive > part_ready[p]:
                part_ready[p] = arrive
            part_in_left[p] -= 1
            try_finish(p)
        k = kind_l[m]
        if k == 1:
            layer = msg_layer_l[m]
            layer_ps_left[layer] -= 1
            if arrive > layer_cmax[layer]:
                layer_cmax[layer] = arrive
            if layer_live[layer] == 0 and layer_ps_left[layer] == 0 and not layer_done[layer]:
                layer_done[layer] = True
                stack_layers.append(layer)
        elif k == 2:
            layer = msg_layer_l[m]
            layer_out_left[layer] -= 1
            if arrive > layer_out_max[layer]:
                layer_out_max[layer] = arrive
            if layer_out_left[layer] == 0:
                for i in range(spill_waiters_off_l[layer], spill_waiters_off_l[layer + 1]):
                    fire_gate(spill_waiters_flat_l[i], layer_out_max[layer])
        drain()

    first_incomplete = -1
    if n_done_layers != n_layers or n_scheduled != n_msgs:
        for layer in range(n_layers):
            if not layer_done[layer]:
                first_incomplete = layer
                break
        if first_incomplete == -1:
            first_incomplete = n_layers  # messages left but layers done

    makespan = 0
    for layer in range(n_layers):
        if layer_complete[layer] > makespan:
            makespan = layer_complete[layer]
    for m in range(n_msgs):
        if end[m] > makespan:
            makespan = end[m]

    return {
        "start": np.asarray(start, dtype=np.int64),
        "end": np.asarray(end, dtype=np.int64),
        "link_busy": np.asarray(link_busy, dtype=np.int64),
        "layer_complete": np.asarray(layer_complete, dtype=np.int64),
        "busy_nop": int(busy_nop),
        "makespan": int(makespan),
        "first_incomplete": int(first_incomplete),
    }
