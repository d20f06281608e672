"""chiplet_lab: traffic simulation and analysis for multi-chiplet DNN accelerators.

Maps neural-network layer graphs onto a grid of compute chiplets, generates
the resulting unicast/multicast message trace over the package's XY mesh,
schedules it against link bandwidth, and reports communication metrics.
"""

from chiplet_lab.arch import ArchConfig, ArchError, NodeId, NodeKind, parse_arch
from chiplet_lab.workload import LayerGraph, LayerOp, WorkloadError, load_workload

__all__ = [
    "ArchConfig",
    "ArchError",
    "NodeId",
    "NodeKind",
    "parse_arch",
    "LayerGraph",
    "LayerOp",
    "WorkloadError",
    "load_workload",
    "__version__",
]

__version__ = "0.1.0"
