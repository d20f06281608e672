# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scheduling kernels.

Drop-in replacement for chiplet_lab._kernels_py: same functions, same
integer semantics, bit-identical outputs.  The heap orders (eligibility, id)
lexicographically exactly like the pure backend's heapq tuples.
"""

import numpy as np

BACKEND = "compiled"


def build_trees(int width, int height, srcs_in, dsts_flat_in, dsts_off_in):
    """Union-of-XY-paths trees for a batch of messages (see pure twin)."""
    cdef int[::1] srcs = np.ascontiguousarray(srcs_in, dtype=np.int32)
    cdef int[::1] dsts = np.ascontiguousarray(dsts_flat_in, dtype=np.int32)
    cdef long long[::1] offs = np.ascontiguousarray(dsts_off_in, dtype=np.int64)
    cdef int n = srcs.shape[0]

    cdef long long bound = 0
    cdef int m
    for m in range(n):
        bound += (offs[m + 1] - offs[m]) * (width + height)

    links_np = np.empty(bound, dtype=np.int64)
    links_off_np = np.zeros(n + 1, dtype=np.int64)
    hops_np = np.zeros(n, dtype=np.int32)
    depth_np = np.zeros(n, dtype=np.int32)
    stamp_np = np.zeros(width * height * 4, dtype=np.int32)
    cdef long long[::1] links = links_np
    cdef long long[::1] links_off = links_off_np
    cdef int[::1] hops = hops_np
    cdef int[::1] depth = depth_np
    cdef int[::1] stamp = stamp_np

    cdef long long pos = 0, di
    cdef int s, sx, sy, tag, dmax, d, dx, dy, dist, x, y, link
    for m in range(n):
        s = srcs[m]
        sx = s % width
        sy = s // width
        tag = m + 1
        dmax = 0
        for di in range(offs[m], offs[m + 1]):
            d = dsts[di]
            dx = d % width
            dy = d // width
            dist = (dx - sx if dx >= sx else sx - dx) + (dy - sy if dy >= sy else sy - dy)
            if dist > dmax:
                dmax = dist
            x = sx
            y = sy
            while x != dx:
                if x < dx:
                    link = (y * width + x) * 4
                    x += 1
                else:
                    link = (y * width + x) * 4 + 1
                    x -= 1
                if stamp[link] != tag:
                    stamp[link] = tag
                    links[pos] = link
                    pos += 1
            while y != dy:
                if y < dy:
                    link = (y * width + x) * 4 + 2
                    y += 1
                else:
                    link = (y * width + x) * 4 + 3
                    y -= 1
                if stamp[link] != tag:
                    stamp[link] = tag
                    links[pos] = link
                    pos += 1
        links_off[m + 1] = pos
        hops[m] = <int> (links_off[m + 1] - links_off[m])
        depth[m] = dmax
    return links_np[:pos].copy(), links_off_np, hops_np, depth_np


cdef class _Sched:
    cdef long long[::1] links_flat, links_off, ser, lat, deliver_off, part_dur
    cdef long long[::1] part_ps_off, layer_parts_off, dep_off, out_off, succs_off, waiters_off
    cdef long long[::1] msg_elig, start, end, part_ready, part_end
    cdef long long[::1] layer_dep_time, layer_cmax, layer_complete, layer_out_max
    cdef long long[::1] link_free, link_busy, hkey
    cdef int[::1] gates_left, msg_layer, deliver_flat, part_layer, part_in_left
    cdef int[::1] part_ps_flat, layer_live, layer_dep_left, dep_flat, out_flat
    cdef int[::1] layer_ps_left, layer_out_left, succs_flat, waiters_flat
    cdef int[::1] hid, stack_parts, stack_layers
    cdef signed char[::1] kind
    cdef unsigned char[::1] part_dep_ok, part_done, layer_done
    cdef long long busy_nop
    cdef int heap_size, sp_top, sl_top, n_done_layers, n_scheduled
    cdef int n_msgs, n_parts, n_layers

    cdef void heap_push(self, long long key, int m):
        cdef int i = self.heap_size
        cdef int parent
        self.heap_size += 1
        while i > 0:
            parent = (i - 1) >> 1
            if self.hkey[parent] < key or (self.hkey[parent] == key and self.hid[parent] < m):
                break
            self.hkey[i] = self.hkey[parent]
            self.hid[i] = self.hid[parent]
            i = parent
        self.hkey[i] = key
        self.hid[i] = m

    cdef void fire_gate(self, int m, long long t):
        if t > self.msg_elig[m]:
            self.msg_elig[m] = t
        self.gates_left[m] -= 1
        if self.gates_left[m] == 0:
            self.heap_push(self.msg_elig[m], m)

    cdef void try_finish(self, int p):
        if self.part_dep_ok[p] and self.part_in_left[p] == 0 and not self.part_done[p]:
            self.part_done[p] = 1
            self.part_end[p] = self.part_ready[p] + self.part_dur[p]
            self.stack_parts[self.sp_top] = p
            self.sp_top += 1

    cdef void layer_dep_fire(self, int layer, long long t):
        cdef long long i
        cdef int p
        for i in range(self.dep_off[layer], self.dep_off[layer + 1]):
            self.fire_gate(self.dep_flat[i], t)
        for p in range(<int> self.layer_parts_off[layer], <int> self.layer_parts_off[layer + 1]):
            if t > self.part_ready[p]:
                self.part_ready[p] = t
            self.part_dep_ok[p] = 1
            self.try_finish(p)

    cdef void drain(self):
        cdef int p, layer, s
        cdef long long t, i
        while self.sp_top > 0 or self.sl_top > 0:
            while self.sp_top > 0:
                self.sp_top -= 1
                p = self.stack_parts[self.sp_top]
                t = self.part_end[p]
                layer = self.part_layer[p]
                for i in range(self.part_ps_off[p], self.part_ps_off[p + 1]):
                    self.fire_gate(self.part_ps_flat[i], t)
                self.layer_live[layer] -= 1
                if t > self.layer_cmax[layer]:
                    self.layer_cmax[layer] = t
                if (self.layer_live[layer] == 0 and self.layer_ps_left[layer] == 0
                        and not self.layer_done[layer]):
                    self.layer_done[layer] = 1
                    self.stack_layers[self.sl_top] = layer
                    self.sl_top += 1
            while self.sl_top > 0:
                self.sl_top -= 1
                layer = self.stack_layers[self.sl_top]
                t = self.layer_cmax[layer]
                self.layer_complete[layer] = t
                self.n_done_layers += 1
                for i in range(self.out_off[layer], self.out_off[layer + 1]):
                    self.fire_gate(self.out_flat[i], t)
                for i in range(self.succs_off[layer], self.succs_off[layer + 1]):
                    s = self.succs_flat[i]
                    self.layer_dep_left[s] -= 1
                    if t > self.layer_dep_time[s]:
                        self.layer_dep_time[s] = t
                    if self.layer_dep_left[s] == 0:
                        self.layer_dep_fire(s, self.layer_dep_time[s])

    cdef void run(self):
        cdef int layer, m, p, k, nl
        cdef long long elig, key, t0, f, tfree, arrive, s_m, i
        for layer in range(self.n_layers):
            if self.layer_dep_left[layer] == 0:
                self.layer_dep_fire(layer, 0)
        self.drain()
        while self.heap_size > 0:
            key = self.hkey[0]
            m = self.hid[0]
            self._pop_root()
            t0 = key
            for i in range(self.links_off[m], self.links_off[m + 1]):
                f = self.link_free[self.links_flat[i]]
                if f > t0:
                    t0 = f
            s_m = self.ser[m]
            tfree = t0 + s_m
            nl = 0
            for i in range(self.links_off[m], self.links_off[m + 1]):
                self.link_free[self.links_flat[i]] = tfree
                self.link_busy[self.links_flat[i]] += s_m
                nl += 1
            self.busy_nop += nl * s_m
            self.start[m] = t0
            arrive = t0 + self.lat[m]
            self.end[m] = arrive
            self.n_scheduled += 1

            for i in range(self.deliver_off[m], self.deliver_off[m + 1]):
                p = self.deliver_flat[i]
                if arrive > self.part_ready[p]:
                    self.part_ready[p] = arrive
                self.part_in_left[p] -= 1
                self.try_finish(p)
            k = self.kind[m]
            if k == 1:
                layer = self.msg_layer[m]
                self.layer_ps_left[layer] -= 1
                if arrive > self.layer_cmax[layer]:
                    self.layer_cmax[layer] = arrive
                if (self.layer_live[layer] == 0 and self.layer_ps_left[layer] == 0
                        and not self.layer_done[layer]):
                    self.layer_done[layer] = 1
                    self.stack_layers[self.sl_top] = layer
                    self.sl_top += 1
            elif k == 2:
                layer = self.msg_layer[m]
                self.layer_out_left[layer] -= 1
                if arrive > self.layer_out_max[layer]:
                    self.layer_out_max[layer] = arrive
                if self.layer_out_left[layer] == 0:
                    for i in range(self.waiters_off[layer], self.waiters_off[layer + 1]):
                        self.fire_gate(self.waiters_flat[i], self.layer_out_max[layer])
            self.drain()

    cdef void _pop_root(self):
        cdef long long lk
        cdef int lid, i, child
        self.heap_size -= 1
        lk = self.hkey[self.heap_size]
        lid = self.hid[self.heap_size]
        i = 0
        while True:
            child = 2 * i + 1
            if child >= self.heap_size:
                break
            if child + 1 < self.heap_size and (
                self.hkey[child + 1] < self.hkey[child]
                or (self.hkey[child + 1] == self.hkey[child]
                    and self.hid[child + 1] < self.hid[child])
            ):
                child += 1
            if self.hkey[child] < lk or (self.hkey[child] == lk and self.hid[child] < lid):
                self.hkey[i] = self.hkey[child]
                self.hid[i] = self.hid[child]
                i = child
            else:
                break
        self.hkey[i] = lk
        self.hid[i] = lid


def run_schedule(
    n_links_total,
    links_flat, links_off, ser, lat, kind, msg_layer, gates_init,
    deliver_flat, deliver_off,
    part_layer, part_dur, part_in_count, part_ps_flat, part_ps_off,
    layer_parts_off, layer_dep_count,
    layer_dep_msgs_flat, layer_dep_msgs_off,
    layer_out_msgs_flat, layer_out_msgs_off,
    layer_ps_count, layer_succs_flat, layer_succs_off,
    spill_waiters_flat, spill_waiters_off,
):
    """Greedy contention scheduler (see the pure twin for the contract)."""
    cdef _Sched s = _Sched()
    n_msgs = len(ser)
    n_parts = len(part_layer)
    n_layers = len(layer_dep_count)
    s.n_msgs = n_msgs
    s.n_parts = n_parts
    s.n_layers = n_layers

    s.links_flat = np.ascontiguousarray(links_flat, dtype=np.int64)
    s.links_off = np.ascontiguousarray(links_off, dtype=np.int64)
    s.ser = np.ascontiguousarray(ser, dtype=np.int64)
    s.lat = np.ascontiguousarray(lat, dtype=np.int64)
    s.kind = np.ascontiguousarray(kind, dtype=np.int8)
    s.msg_layer = np.ascontiguousarray(msg_layer, dtype=np.int32)
    s.gates_left = np.ascontiguousarray(gates_init, dtype=np.int32)
    s.deliver_flat = np.ascontiguousarray(deliver_flat, dtype=np.int32)
    s.deliver_off = np.ascontiguousarray(deliver_off, dtype=np.int64)
    s.part_layer = np.ascontiguousarray(part_layer, dtype=np.int32)
    s.part_dur = np.ascontiguousarray(part_dur, dtype=np.int64)
    s.part_in_left = np.ascontiguousarray(part_in_count, dtype=np.int32).copy()
    s.part_ps_flat = np.ascontiguousarray(part_ps_flat, dtype=np.int32)
    s.part_ps_off = np.ascontiguousarray(part_ps_off, dtype=np.int64)
    s.layer_parts_off = np.ascontiguousarray(layer_parts_off, dtype=np.int64)
    s.layer_dep_left = np.ascontiguousarray(layer_dep_count, dtype=np.int32).copy()
    s.dep_flat = np.ascontiguousarray(layer_dep_msgs_flat, dtype=np.int32)
    s.dep_off = np.ascontiguousarray(layer_dep_msgs_off, dtype=np.int64)
    s.out_flat = np.ascontiguousarray(layer_out_msgs_flat, dtype=np.int32)
    s.out_off = np.ascontiguousarray(layer_out_msgs_off, dtype=np.int64)
    s.layer_ps_left = np.ascontiguousarray(layer_ps_count, dtype=np.int32).copy()
    s.succs_flat = np.ascontiguousarray(layer_succs_flat, dtype=np.int32)
    s.succs_off = np.ascontiguousarray(layer_succs_off, dtype=np.int64)
    s.waiters_flat = np.ascontiguousarray(spill_waiters_flat, dtype=np.int32)
    s.waiters_off = np.ascontiguousarray(spill_waiters_off, dtype=np.int64)

    start_np = np.zeros(n_msgs, dtype=np.int64)
    end_np = np.zeros(n_msgs, dtype=np.int64)
    link_busy_np = np.zeros(n_links_total, dtype=np.int64)
    layer_complete_np = np.zeros(n_layers, dtype=np.int64)
    s.start = start_np
    s.end = end_np
    s.link_busy = link_busy_np
    s.layer_complete = layer_complete_np
    s.msg_elig = np.zeros(n_msgs, dtype=np.int64)
    s.part_ready = np.zeros(n_parts, dtype=np.int64)
    s.part_end = np.zeros(n_parts, dtype=np.int64)
    s.layer_dep_time = np.zeros(n_layers, dtype=np.int64)
    s.layer_cmax = np.zeros(n_layers, dtype=np.int64)
    s.layer_out_max = np.zeros(n_layers, dtype=np.int64)
    s.link_free = np.zeros(n_links_total, dtype=np.int64)
    s.hkey = np.zeros(max(n_msgs, 1), dtype=np.int64)
    s.hid = np.zeros(max(n_msgs, 1), dtype=np.int32)
    s.stack_parts = np.zeros(max(n_parts, 1), dtype=np.int32)
    s.stack_layers = np.zeros(max(n_layers, 1), dtype=np.int32)
    s.part_dep_ok = np.zeros(n_parts, dtype=np.uint8)
    s.part_done = np.zeros(n_parts, dtype=np.uint8)
    s.layer_done = np.zeros(n_layers, dtype=np.uint8)

    live_np = np.zeros(n_layers, dtype=np.int32)
    cdef int li
    for li in range(n_layers):
        live_np[li] = int(layer_parts_off[li + 1] - layer_parts_off[li])
    layer_out_left_np = np.zeros(n_layers, dtype=np.int32)
    for li in range(n_layers):
        layer_out_left_np[li] = int(layer_out_msgs_off[li + 1] - layer_out_msgs_off[li])
    s.layer_live = live_np
    s.layer_out_left = layer_out_left_np

    s.heap_size = 0
    s.sp_top = 0
    s.sl_top = 0
    s.n_done_layers = 0
    s.n_scheduled = 0
    s.busy_nop = 0

    s.run()

    first_incomplete = -1
    if s.n_done_layers != n_layers or s.n_scheduled != n_msgs:
        for li in range(n_layers):
            if not s.layer_done[li]:
                first_incomplete = li
                break
        if first_incomplete == -1:
            first_incomplete = n_layers

    makespan = 0
    for li in range(n_layers):
        if layer_complete_np[li] > makespan:
            makespan = int(layer_complete_np[li])
    cdef int m
    for m in range(n_msgs):
        if end_np[m] > makespan:
            makespan = int(end_np[m])

    return {
        "start": start_np,
        "end": end_np,
        "link_busy": link_busy_np,
        "layer_complete": layer_complete_np,
        "busy_nop": int(s.busy_nop),
        "makespan": int(makespan),
        "first_incomplete": int(first_incomplete),
    }
