#!/usr/bin/env python3
"""Compare the compiled scheduler kernels against the pure-Python fallback.

Runs the heaviest bundled workloads through the full pipeline once, then
times the kernel stage (tree construction + schedule) under both backends
on identical inputs and checks that the outputs are bit-identical.

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from chiplet_lab import _kernels_py
from chiplet_lab.arch import parse_arch
from chiplet_lab.mapper import build_messages, parse_policy, place_layers
from chiplet_lab.netsim import simulate
from chiplet_lab.workload import load_workload

try:
    from chiplet_lab import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

WORKLOAD_DIR = Path(__file__).resolve().parents[1] / "src" / "chiplet_lab" / "workloads"
CASES = ("densenet", "resnet152", "gnmt")
REPEAT = 3


class _TimedKernels:
    """Proxy that forwards kernel calls and accumulates their wall time."""

    def __init__(self, module):
        self._module = module
        self.elapsed = 0.0

    def _timed(self, fn, *args):
        t0 = time.perf_counter()
        out = fn(*args)
        self.elapsed += time.perf_counter() - t0
        return out

    def build_trees(self, *args):
        return self._timed(self._module.build_trees, *args)

    def run_schedule(self, *args):
        return self._timed(self._module.run_schedule, *args)


def run_with(kernels_module, msgs, asn, graph, cfg):
    import chiplet_lab.netsim as netsim

    proxy = _TimedKernels(kernels_module)
    saved = netsim.kernels
    netsim.kernels = proxy
    try:
        trace = simulate(msgs, asn, graph, cfg)
    finally:
        netsim.kernels = saved
    return trace, proxy.elapsed


def main() -> None:
    if _kernels is None:
        print("compiled backend not built; nothing to compare")
        return
    cfg = parse_arch("6x3")
    total_fast = total_slow = 0.0
    print("kernel-stage time (tree construction + schedule), best of "
          f"{REPEAT} runs on the 6x3 array")
    print(f"{'workload':<12} {'msgs':>7} {'compiled':>10} {'pure':>10} {'speedup':>8}")
    for name in CASES:
        graph = load_workload(WORKLOAD_DIR / f"{name}.json")
        asn = place_layers(graph, cfg, parse_policy("all"))
        msgs = build_messages(graph, asn, cfg)
        fast_t = slow_t = float("inf")
        fast_trace = slow_trace = None
        for _ in range(REPEAT):
            fast_trace, dt = run_with(_kernels, msgs, asn, graph, cfg)
            fast_t = min(fast_t, dt)
            slow_trace, dt = run_with(_kernels_py, msgs, asn, graph, cfg)
            slow_t = min(slow_t, dt)
        np.testing.assert_array_equal(fast_trace.start, slow_trace.start)
        np.testing.assert_array_equal(fast_trace.end, slow_trace.end)
        np.testing.assert_array_equal(fast_trace.link_busy, slow_trace.link_busy)
        assert fast_trace.busy == slow_trace.busy
        assert fast_trace.makespan == slow_trace.makespan
        total_fast += fast_t
        total_slow += slow_t
        print(f"{name:<12} {len(msgs):>7} {fast_t * 1e3:>8.1f}ms {slow_t * 1e3:>8.1f}ms "
              f"{slow_t / fast_t:>7.2f}x")
    print(f"{'total':<12} {'':>7} {total_fast * 1e3:>8.1f}ms {total_slow * 1e3:>8.1f}ms "
          f"{total_slow / total_fast:>7.2f}x")
    print("outputs identical across backends")


if __name__ == "__main__":
    main()
