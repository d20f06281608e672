"""Shared fixtures for the test suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from chiplet_lab.arch import ArchConfig, parse_arch
from chiplet_lab.workload import LayerGraph, load_workload, parse_workload

WORKLOAD_DIR = Path(__file__).resolve().parents[1] / "src" / "chiplet_lab" / "workloads"


def bundled(name: str) -> Path:
    path = WORKLOAD_DIR / f"{name}.json"
    assert path.is_file(), f"missing bundled workload {name}"
    return path


@pytest.fixture(scope="session")
def all_workload_paths() -> list[Path]:
    paths = sorted(WORKLOAD_DIR.glob("*.json"))
    assert len(paths) == 12
    return paths


@pytest.fixture(scope="session")
def arch_1x2() -> ArchConfig:
    return parse_arch("1x2")


@pytest.fixture(scope="session")
def arch_3x3() -> ArchConfig:
    return parse_arch("3x3")


@pytest.fixture(scope="session")
def arch_6x3() -> ArchConfig:
    return parse_arch("6x3")


def tiny_chain() -> LayerGraph:
    """Two stacked 1x1 convolutions on a small feature map."""
    return parse_workload(
        {
            "name": "tiny_chain",
            "layers": [
                {"id": "c1", "op": "Conv",
                 "dims": {"C": 3, "K": 32, "R": 1, "S": 1, "H": 16, "W": 16}},
                {"id": "c2", "op": "Conv", "preds": ["c1"],
                 "dims": {"C": 32, "K": 32, "R": 1, "S": 1, "H": 16, "W": 16}},
            ],
        }
    )


def tiny_residual() -> LayerGraph:
    """A conv pair with an elementwise skip connection."""
    return parse_workload(
        {
            "name": "tiny_residual",
            "layers": [
                {"id": "c1", "op": "Conv",
                 "dims": {"C": 32, "K": 32, "R": 3, "S": 3, "H": 16, "W": 16}},
                {"id": "c2", "op": "Conv", "preds": ["c1"],
                 "dims": {"C": 32, "K": 32, "R": 3, "S": 3, "H": 16, "W": 16}},
                {"id": "add", "op": "EltwiseAdd", "preds": ["c1", "c2"],
                 "dims": {"elems": 32 * 16 * 16}},
            ],
        }
    )


@pytest.fixture()
def chain_graph() -> LayerGraph:
    return tiny_chain()


@pytest.fixture()
def residual_graph() -> LayerGraph:
    return tiny_residual()


@pytest.fixture(scope="session")
def gnmt_graph() -> LayerGraph:
    return load_workload(bundled("gnmt"))


@pytest.fixture(scope="session")
def tf_cell_graph() -> LayerGraph:
    return load_workload(bundled("tf_cell"))
