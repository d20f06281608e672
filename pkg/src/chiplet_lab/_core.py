"""Kernel backend selection.

The compiled extension (chiplet_lab._kernels, Cython) and the pure-Python
module (chiplet_lab._kernels_py) implement the same two functions with
bit-identical results; the compiled one is picked when available.  Set
CHIPLET_LAB_PURE=1 to force the pure backend (used by the benchmark and the
cross-backend tests).
"""

from __future__ import annotations

import os

if os.environ.get("CHIPLET_LAB_PURE") == "1":
    from chiplet_lab import _kernels_py as kernels
else:
    try:
        from chiplet_lab import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from chiplet_lab import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    """Which kernel implementation this process is using: compiled or pure."""
    return kernels.BACKEND


__all__ = ["kernels", "backend_name"]
