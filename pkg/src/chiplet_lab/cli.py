"""Command line driver: sweep workloads across package configurations.

Every (workload, config) pair is mapped, simulated, and analyzed
independently; per-pair outputs land in out_dir/<workload>/<config>/ (the
message trace plus that pair's report files) and the aggregate report files
for the whole sweep land in out_dir itself.  A failing pair is reported on
stderr and makes the exit code nonzero, but never stops other pairs.
"""

from __future__ import annotations

import argparse
import glob as globmod
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from chiplet_lab.analyzer import MetricsReport, analyze, emit_report
from chiplet_lab.arch import ArchConfig, load_arch_file, parse_arch
from chiplet_lab.mapper import build_messages, parse_policy, place_layers
from chiplet_lab.netsim import dump_trace, simulate
from chiplet_lab.workload import load_workload

__all__ = ["ExperimentSpec", "main", "run", "bundled_workloads"]

_GRID_TOKEN = re.compile(r"\d+x\d+(,.*)?$")
ENV_OUT = "CHIPLET_LAB_OUT"


def bundled_workloads() -> dict[str, Path]:
    """Workload files shipped with the package, keyed by name."""
    root = resources.files("chiplet_lab") / "workloads"
    out: dict[str, Path] = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out[entry.name[: -len(".json")]] = Path(str(entry))
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    """A resolved sweep: every workload runs on every architecture."""

    workloads: tuple[Path, ...]
    archs: tuple[str, ...]
    policy: str = "all"
    out_dir: Path = Path("chiplet_lab_runs")
    fmt: str = "csv"
    normalize: bool = False
    store_and_forward: bool = False
    serial_multicast: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.workloads:
            raise ValueError("experiment needs at least one workload")
        if not self.archs:
            raise ValueError("experiment needs at least one architecture")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def _load_arch(token: str, normalize: bool) -> ArchConfig:
    if _GRID_TOKEN.fullmatch(token.strip()):
        return parse_arch(token, normalize=normalize)
    if Path(token).is_file():
        return load_arch_file(token, normalize=normalize)
    raise ValueError(f"arch {token!r} is neither a <rows>x<cols> string nor a config file")


def _arch_label(token: str) -> str:
    """Directory/report label for an arch argument (file stem or sanitized grid)."""
    if not _GRID_TOKEN.fullmatch(token.strip()) and Path(token).is_file():
        return Path(token).stem
    return re.sub(r"[^A-Za-z0-9_.x-]+", "_", token.strip())


def _run_pair(
    workload_path: str,
    arch_token: str,
    policy_text: str,
    out_root: str,
    fmt: str,
    normalize: bool,
    store_and_forward: bool,
    serial_multicast: bool,
) -> tuple[str, str, MetricsReport | str]:
    """Simulate one (workload, arch) pair; returns ("ok", label, report) or
    ("err", label, message).  Executed in worker processes, so it re-parses
    its inputs and touches only its own files."""
    label = _arch_label(arch_token)
    name = Path(workload_path).stem
    try:
        graph = load_workload(workload_path)
        name = graph.name
        cfg = _load_arch(arch_token, normalize)
        policy = parse_policy(policy_text)
        assignments = place_layers(graph, cfg, policy)
        messages = build_messages(graph, assignments, cfg)
        trace = simulate(
            messages, assignments, graph, cfg,
            store_and_forward=store_and_forward,
            serial_multicast=serial_multicast,
        )
        report = analyze(trace, config=label)
        pair_dir = Path(out_root) / graph.name / label
        pair_dir.mkdir(parents=True, exist_ok=True)
        dump_trace(trace, pair_dir / "trace.csv")
        emit_report([report], pair_dir, fmt)
        return ("ok", f"{graph.name}/{label}", report)
    except Exception as exc:  # noqa: BLE001 - pair isolation is the contract
        return ("err", f"{name}/{label}", f"{type(exc).__name__}: {exc}")


def run(spec: ExperimentSpec) -> int:
    """Execute the sweep; returns a process exit code."""
    pairs = [
        (str(w), a)
        for w in spec.workloads
        for a in spec.archs
    ]
    args = [
        (
            w, a, spec.policy, str(spec.out_dir), spec.fmt, spec.normalize,
            spec.store_and_forward, spec.serial_multicast,
        )
        for (w, a) in pairs
    ]
    if spec.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_pair_star, args))
    else:
        results = [_run_pair_star(a) for a in args]

    reports: list[MetricsReport] = []
    failures: list[tuple[str, str]] = []
    for kind, label, payload in results:
        if kind == "ok":
            report = payload
            reports.append(report)
            print(
                f"{label}: makespan={report.makespan} comm={report.total_comm_cycles} "
                f"msgs={report.n_unicast + report.n_multicast}"
            )
        else:
            failures.append((label, payload))
            print(f"error: {label}: {payload}", file=sys.stderr)
    if reports:
        emit_report(reports, spec.out_dir, spec.fmt)
    return 1 if failures else 0


def _run_pair_star(packed: tuple) -> tuple[str, str, str]:
    return _run_pair(*packed)


def _resolve_workloads(tokens: list[str]) -> tuple[Path, ...]:
    bundled = bundled_workloads()
    if not tokens:
        return tuple(bundled.values())
    out: list[Path] = []
    seen: set[Path] = set()
    for token in tokens:
        if token in bundled:
            matches = [bundled[token]]
        else:
            matches = [Path(p) for p in sorted(globmod.glob(token, recursive=True))]
        if not matches:
            raise ValueError(f"workload pattern {token!r} matched nothing")
        for m in matches:
            if m not in seen:
                seen.add(m)
                out.append(m)
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiplet-lab",
        description="Simulate DNN workload traffic on multi-chiplet packages.",
    )
    parser.add_argument(
        "--workloads",
        action="append",
        default=[],
        metavar="GLOB",
        help="workload JSON files (glob) or a bundled workload name; "
        "repeatable; default: all bundled workloads",
    )
    parser.add_argument(
        "--arch",
        action="append",
        default=[],
        metavar="ARCH",
        help="grid shorthand like 3x3 (with optional key=value overrides) or a "
        "config file path; repeatable; default: 1x2 3x3 6x3",
    )
    parser.add_argument(
        "--policy",
        default="all",
        help="mapping policy: 'all' or 'pipeline:<layers-per-segment>' (default: all)",
    )
    parser.add_argument(
        "--out",
        default=None,
        metavar="DIR",
        help=f"output directory (default: ${ENV_OUT} or ./chiplet_lab_runs)",
    )
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument(
        "--normalize",
        action="store_true",
        help="treat AxB and BxA grids as the same (rows=min, cols=max)",
    )
    parser.add_argument(
        "--store-and-forward",
        action="store_true",
        help="pay serialization per hop instead of cut-through latency",
    )
    parser.add_argument(
        "--serial-multicast",
        action="store_true",
        help="expand every multicast into per-destination unicasts",
    )
    parser.add_argument("--jobs", type=int, default=1, metavar="N")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workloads = _resolve_workloads(args.workloads)
        out_dir = args.out or os.environ.get(ENV_OUT) or "chiplet_lab_runs"
        spec = ExperimentSpec(
            workloads=workloads,
            archs=tuple(args.arch) if args.arch else ("1x2", "3x3", "6x3"),
            policy=args.policy,
            out_dir=Path(out_dir),
            fmt=args.format,
            normalize=args.normalize,
            store_and_forward=args.store_and_forward,
            serial_multicast=args.serial_multicast,
            jobs=args.jobs,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
