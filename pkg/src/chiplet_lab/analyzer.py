"""Trace analysis: busy-cycle breakdowns, histograms, and report files.

The communication cost of a run is split over three resources: the
package-level mesh (NoP link cycles), the chiplet-local networks (NoC
endpoint cycles), and DRAM access cycles.  Fractions are of total
communication cycles and sum to 1 within 1e-9 (or are all zero, flagged,
for traffic-free runs).

Report files written by emit_report:

* breakdown.csv   one row per (workload, config) with cycles and fractions
* mcast_hist.csv  multicast fan-out histogram (messages with >= 2 dsts)
* hop_hist.csv    hop histogram split by unicast/multicast
* summary.json    everything above plus per-workload normalized makespan

Rows are sorted by (workload, config, key) and files are written atomically,
so repeated runs produce byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from chiplet_lab.arch import ArchConfig, NodeKind
from chiplet_lab.netsim import TimedTrace, load_trace

__all__ = [
    "AnalysisError",
    "MetricsReport",
    "MulticastStats",
    "analyze",
    "analyze_trace_file",
    "time_breakdown",
    "nop_ratio_stats",
    "multicast_histogram",
    "hop_histogram",
    "emit_report",
]


class AnalysisError(ValueError):
    """Raised for empty report groups or malformed report requests."""


@dataclass(frozen=True)
class MetricsReport:
    """Communication metrics of one (workload, config) run."""

    workload: str
    config: str
    noc_cycles: int
    nop_cycles: int
    dram_cycles: int
    total_comm_cycles: int
    makespan: int
    compute_cycles: int
    n_unicast: int
    n_multicast: int
    frac_noc: float
    frac_nop: float
    frac_dram: float
    zero_comm: bool
    mcast_hist: dict[int, int] = field(compare=False)
    hop_hist: dict[tuple[str, int], int] = field(compare=False)

    def to_dict(self) -> dict:
        hop_nested: dict[str, dict[str, int]] = {"unicast": {}, "multicast": {}}
        for (kind, hops), count in sorted(self.hop_hist.items()):
            hop_nested[kind][str(hops)] = count
        comm_plus_compute = self.total_comm_cycles + self.compute_cycles
        return {
            "workload": self.workload,
            "config": self.config,
            "noc_cycles": self.noc_cycles,
            "nop_cycles": self.nop_cycles,
            "dram_cycles": self.dram_cycles,
            "total_comm_cycles": self.total_comm_cycles,
            "makespan": self.makespan,
            "compute_cycles": self.compute_cycles,
            "n_unicast": self.n_unicast,
            "n_multicast": self.n_multicast,
            "frac_noc": self.frac_noc,
            "frac_nop": self.frac_nop,
            "frac_dram": self.frac_dram,
            "zero_comm": self.zero_comm,
            "comm_fraction": (
                self.total_comm_cycles / comm_plus_compute if comm_plus_compute else 0.0
            ),
            "mcast_hist": {str(k): v for k, v in sorted(self.mcast_hist.items())},
            "hop_hist": hop_nested,
        }


def _fractions(noc: int, nop: int, dram: int) -> tuple[float, float, float, bool]:
    total = noc + nop + dram
    if total == 0:
        return 0.0, 0.0, 0.0, True
    return noc / total, nop / total, dram / total, False


def time_breakdown(trace: TimedTrace) -> tuple[float, float, float]:
    """(frac_noc, frac_nop, frac_dram) of total communication cycles.

    A run with zero communication yields (0, 0, 0); the analyze() report
    carries the zero_comm flag for that case.
    """
    f_noc, f_nop, f_dram, _ = _fractions(
        trace.busy["noc"], trace.busy["nop"], trace.busy["dram"]
    )
    return f_noc, f_nop, f_dram


class MulticastStats(NamedTuple):
    hist: dict[int, int]
    n_multicast: int
    n_messages: int


def multicast_histogram(trace: TimedTrace) -> MulticastStats:
    """Fan-out histogram of multicasts (|dsts| >= 2) plus total message count."""
    hist: dict[int, int] = {}
    n_multi = 0
    for m in trace.messages:
        n = len(m.dsts)
        if n >= 2:
            hist[n] = hist.get(n, 0) + 1
            n_multi += 1
    return MulticastStats(hist, n_multi, len(trace.messages))


def hop_histogram(trace: TimedTrace, metric: str = "links") -> dict[tuple[str, int], int]:
    """Histogram of route size keyed by (kind, hops), kind unicast/multicast.

    metric selects the hop measure: "links" counts tree links (a unicast's
    path length), "longest_path" the deepest source-to-destination distance.
    """
    if metric not in ("links", "longest_path"):
        raise AnalysisError(f"unknown hop metric {metric!r}")
    values = trace.hops if metric == "links" else trace.longest_path
    hist: dict[tuple[str, int], int] = {}
    for i, m in enumerate(trace.messages):
        key = ("multicast" if len(m.dsts) >= 2 else "unicast", int(values[i]))
        hist[key] = hist.get(key, 0) + 1
    return hist


def analyze(trace: TimedTrace, config: str | None = None) -> MetricsReport:
    """Full metrics report for one simulated trace."""
    mstats = multicast_histogram(trace)
    noc, nop, dram = trace.busy["noc"], trace.busy["nop"], trace.busy["dram"]
    f_noc, f_nop, f_dram, zero = _fractions(noc, nop, dram)
    return MetricsReport(
        workload=trace.workload,
        config=config if config is not None else trace.cfg.label,
        noc_cycles=noc,
        nop_cycles=nop,
        dram_cycles=dram,
        total_comm_cycles=noc + nop + dram,
        makespan=trace.makespan,
        compute_cycles=trace.compute_cycles,
        n_unicast=mstats.n_messages - mstats.n_multicast,
        n_multicast=mstats.n_multicast,
        frac_noc=f_noc,
        frac_nop=f_nop,
        frac_dram=f_dram,
        zero_comm=zero,
        mcast_hist=mstats.hist,
        hop_hist=hop_histogram(trace),
    )


def analyze_trace_file(
    path: str | Path, cfg: ArchConfig, workload: str, config: str | None = None
) -> MetricsReport:
    """Recompute communication metrics from a dumped trace CSV.

    Trace files carry no compute information, so compute_cycles is 0 and
    makespan is the latest message arrival (the live makespan additionally
    covers compute that outlasts the last message).  All communication
    fields match analyze() of the originating trace exactly.
    """
    rows = load_trace(path)
    noc = nop = dram = 0
    n_multi = 0
    mcast_hist: dict[int, int] = {}
    hop_hist: dict[tuple[str, int], int] = {}
    makespan = 0
    for r in rows:
        ser = math.ceil(r.bytes / cfg.nop_bw)
        nop += r.hops * ser
        ends = [r.src, *r.dsts]
        noc += math.ceil(r.bytes / cfg.noc_bw) * sum(
            1 for e in ends if e.kind is NodeKind.COMPUTE
        )
        dram += math.ceil(r.bytes / cfg.dram_bw) * sum(
            1 for e in ends if e.kind is NodeKind.DRAM
        )
        n = len(r.dsts)
        if n >= 2:
            mcast_hist[n] = mcast_hist.get(n, 0) + 1
            n_multi += 1
        key = ("multicast" if n >= 2 else "unicast", r.hops)
        hop_hist[key] = hop_hist.get(key, 0) + 1
        if r.end > makespan:
            makespan = r.end
    f_noc, f_nop, f_dram, zero = _fractions(noc, nop, dram)
    return MetricsReport(
        workload=workload,
        config=config if config is not None else cfg.label,
        noc_cycles=noc,
        nop_cycles=nop,
        dram_cycles=dram,
        total_comm_cycles=noc + nop + dram,
        makespan=makespan,
        compute_cycles=0,
        n_unicast=len(rows) - n_multi,
        n_multicast=n_multi,
        frac_noc=f_noc,
        frac_nop=f_nop,
        frac_dram=f_dram,
        zero_comm=zero,
        mcast_hist=mcast_hist,
        hop_hist=hop_hist,
    )


def _quantile(sorted_vals: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile on pre-sorted values (R type 7)."""
    n = len(sorted_vals)
    if n == 1:
        return float(sorted_vals[0])
    h = (n - 1) * q
    lo = int(h)
    frac = h - lo
    if lo + 1 >= n:
        return float(sorted_vals[-1])
    return sorted_vals[lo] + (sorted_vals[lo + 1] - sorted_vals[lo]) * frac


def nop_ratio_stats(reports: Iterable[MetricsReport]) -> dict[str, dict[str, float]]:
    """Five-number summary of the NoP fraction per config, across workloads."""
    groups: dict[str, list[float]] = {}
    for r in reports:
        groups.setdefault(r.config, []).append(r.frac_nop)
    if not groups:
        raise AnalysisError("no reports to summarize")
    out: dict[str, dict[str, float]] = {}
    for config in sorted(groups):
        vals = sorted(groups[config])
        out[config] = {
            "min": vals[0],
            "q1": _quantile(vals, 0.25),
            "median": _quantile(vals, 0.5),
            "q3": _quantile(vals, 0.75),
            "max": vals[-1],
        }
    return out


_BREAKDOWN_HEADER = (
    "workload,config,noc_cycles,nop_cycles,dram_cycles,"
    "total_comm_cycles,makespan,frac_noc,frac_nop,frac_dram"
)


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def emit_report(
    reports: Sequence[MetricsReport], out_dir: str | Path, fmt: str = "csv"
) -> list[Path]:
    """Write report files; returns the paths written.

    fmt "csv" writes breakdown.csv, mcast_hist.csv, hop_hist.csv, and
    summary.json; fmt "json" writes only summary.json.
    """
    if fmt not in ("csv", "json"):
        raise AnalysisError(f"unknown report format {fmt!r}")
    if not reports:
        raise AnalysisError("no reports to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(reports, key=lambda r: (r.workload, r.config))
    written: list[Path] = []

    if fmt == "csv":
        lines = [_BREAKDOWN_HEADER]
        for r in ordered:
            lines.append(
                f"{r.workload},{r.config},{r.noc_cycles},{r.nop_cycles},{r.dram_cycles},"
                f"{r.total_comm_cycles},{r.makespan},{r.frac_noc!r},{r.frac_nop!r},"
                f"{r.frac_dram!r}"
            )
        _write_atomic(out / "breakdown.csv", "\n".join(lines) + "\n")
        written.append(out / "breakdown.csv")

        lines = ["workload,config,n_dsts,messages"]
        for r in ordered:
            for n_dsts, count in sorted(r.mcast_hist.items()):
                lines.append(f"{r.workload},{r.config},{n_dsts},{count}")
        _write_atomic(out / "mcast_hist.csv", "\n".join(lines) + "\n")
        written.append(out / "mcast_hist.csv")

        lines = ["workload,config,kind,hops,messages"]
        for r in ordered:
            for (kind, hops), count in sorted(r.hop_hist.items()):
                lines.append(f"{r.workload},{r.config},{kind},{hops},{count}")
        _write_atomic(out / "hop_hist.csv", "\n".join(lines) + "\n")
        written.append(out / "hop_hist.csv")

    # normalized makespan per workload: 1.0 for the slowest config
    by_workload: dict[str, list[MetricsReport]] = {}
    for r in ordered:
        by_workload.setdefault(r.workload, []).append(r)
    norm: dict[str, dict[str, float]] = {}
    for wname, group in sorted(by_workload.items()):
        peak = max(g.makespan for g in group)
        norm[wname] = {
            g.config: (g.makespan / peak if peak else 0.0) for g in group
        }
    summary = {
        "reports": [r.to_dict() for r in ordered],
        "nop_ratio_stats": nop_ratio_stats(ordered),
        "norm_makespan": norm,
    }
    _write_atomic(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(out / "summary.json")
    return written
