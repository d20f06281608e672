"""Tests for array configuration parsing and node layout."""

from __future__ import annotations

import math

import pytest

from chiplet_lab.arch import (
    ArchConfig,
    ArchError,
    NodeId,
    NodeKind,
    load_arch_file,
    parse_arch,
    render_arch,
)


class TestNodeId:
    def test_labels(self):
        assert NodeId(NodeKind.COMPUTE, 1, 0).label == "C1.0"
        assert NodeId(NodeKind.DRAM, 0, 2).label == "D0.2"
        assert NodeId(NodeKind.ROUTER, 4, 1).label == "R4.1"

    def test_from_label_round_trip(self):
        for node in (
            NodeId(NodeKind.COMPUTE, 3, 2),
            NodeId(NodeKind.DRAM, 0, 0),
            NodeId(NodeKind.ROUTER, 7, 1),
        ):
            assert NodeId.from_label(node.label) == node

    def test_from_label_rejects_garbage(self):
        with pytest.raises(ArchError):
            NodeId.from_label("X1.0")
        with pytest.raises(ArchError):
            NodeId.from_label("C1")


class TestGridLayout:
    def test_3x3_node_count(self, arch_3x3):
        assert arch_3x3.compute_count == 9
        assert len(arch_3x3.nodes()) == 13

    def test_1x2_node_count(self, arch_1x2):
        # two chiplets plus four memory ports on an extended two-row frame
        assert arch_1x2.compute_count == 2
        assert len(arch_1x2.nodes()) == 6
        assert arch_1x2.grid_height == 2

    def test_6x3_node_count(self, arch_6x3):
        assert arch_6x3.compute_count == 18
        assert len(arch_6x3.nodes()) == 22

    def test_compute_nodes_row_major(self, arch_3x3):
        nodes = arch_3x3.compute_nodes()
        assert nodes[0] == NodeId(NodeKind.COMPUTE, 1, 0)
        assert nodes[1] == NodeId(NodeKind.COMPUTE, 2, 0)
        assert nodes[3] == NodeId(NodeKind.COMPUTE, 1, 1)
        assert all(n.kind is NodeKind.COMPUTE for n in nodes)

    def test_dram_corner_positions_3x3(self, arch_3x3):
        spots = [(n.x, n.y) for n in arch_3x3.dram_nodes()]
        assert spots == [(0, 0), (4, 0), (0, 2), (4, 2)]

    def test_dram_sides_alternate(self, arch_6x3):
        # grid is rows x cols: the east column sits at cols + 1
        xs = [n.x for n in arch_6x3.dram_nodes()]
        assert xs == [0, 4, 0, 4]

    def test_dram_home_wraps(self, arch_3x3):
        drams = arch_3x3.dram_nodes()
        assert arch_3x3.dram_home(0) == drams[0]
        assert arch_3x3.dram_home(5) == drams[1]

    def test_single_dram(self):
        cfg = parse_arch("3x3,dram_count=1")
        drams = cfg.dram_nodes()
        assert len(drams) == 1
        assert (drams[0].x, drams[0].y) == (0, 1)


class TestParsing:
    def test_defaults(self, arch_3x3):
        cfg = arch_3x3
        assert cfg.dram_count == 4
        assert cfg.nop_bw == pytest.approx(4.0)
        assert cfg.noc_bw == pytest.approx(8.0)
        assert cfg.dram_bw == pytest.approx(16.0)
        assert cfg.hop_latency == 1
        assert cfg.pe_count == 256
        assert cfg.macs_per_pe_cycle == 1
        assert cfg.gbuf_bytes == 2 * 1024 * 1024
        assert cfg.clock_hz == pytest.approx(1e9)

    def test_zero_dimension_rejected(self):
        with pytest.raises(ArchError):
            parse_arch("0x3")

    def test_malformed_grid_rejected(self):
        with pytest.raises(ArchError):
            parse_arch("3by3")

    def test_unknown_key_rejected(self):
        with pytest.raises(ArchError, match="unknown"):
            parse_arch("3x3,warp_speed=9")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ArchError, match="duplicate"):
            parse_arch("3x3,dram_count=2,dram_count=4")

    def test_exact_override(self):
        cfg = parse_arch("3x3,nop_bpc=2,hop_latency=3")
        assert cfg.nop_bw == pytest.approx(2.0)
        assert cfg.hop_latency == 3

    def test_scaled_override(self):
        cfg = parse_arch("3x3,nop_bw_gbps=8,clock_ghz=2")
        # 8 GB/s at 2 GHz is 4 bytes per cycle
        assert cfg.nop_bw == pytest.approx(4.0)
        assert cfg.clock_hz == pytest.approx(2e9)

    def test_scaled_and_exact_conflict(self):
        with pytest.raises(ArchError):
            parse_arch("3x3,nop_bpc=4,nop_bw_gbps=8")

    def test_normalize_scales_bandwidth(self):
        base = parse_arch("3x3")
        norm = parse_arch("3x3", normalize=True)
        ratio = norm.nop_bw / base.nop_bw
        assert norm.noc_bw / base.noc_bw == pytest.approx(ratio)
        assert norm.dram_bw / base.dram_bw == pytest.approx(ratio)

    def test_render_parse_round_trip(self):
        for text in ("3x3", "6x3,dram_count=2", "1x2,nop_bpc=2.5,hop_latency=4"):
            cfg = parse_arch(text)
            again = parse_arch(render_arch(cfg))
            assert again == cfg

    def test_with_overrides(self, arch_3x3):
        from chiplet_lab.arch import with_overrides

        cfg = with_overrides(arch_3x3, hop_latency=2)
        assert cfg.hop_latency == 2
        assert cfg.cols == 3 and cfg.rows == 3

    def test_label(self):
        assert parse_arch("6x3").label == "6x3"


class TestArchFile:
    def test_load_file(self, tmp_path):
        path = tmp_path / "arch.cfg"
        path.write_text("# test config\ngrid = 3x3\nnop_bpc = 2\n\nhop_latency = 2\n")
        cfg = load_arch_file(path)
        assert cfg.cols == 3 and cfg.rows == 3
        assert cfg.nop_bw == pytest.approx(2.0)
        assert cfg.hop_latency == 2

    def test_missing_grid(self, tmp_path):
        path = tmp_path / "arch.cfg"
        path.write_text("nop_bpc = 2\n")
        with pytest.raises(ArchError, match="grid"):
            load_arch_file(path)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "arch.cfg"
        path.write_text("grid = 3x3\nbogus line\n")
        with pytest.raises(ArchError):
            load_arch_file(path)


class TestManyDrams:
    def test_more_drams_than_rows_extends_grid(self):
        cfg = parse_arch("1x2,dram_count=4")
        assert cfg.grid_height == 2
        labels = {n.label for n in cfg.dram_nodes()}
        assert labels == {"D0.0", "D3.0", "D0.1", "D3.1"}

    def test_dram_rows_spread(self):
        cfg = parse_arch("5x3,dram_count=4")
        west = [n.y for n in cfg.dram_nodes() if n.x == 0]
        assert west == [0, 4]

    def test_odd_dram_count_west_heavy(self):
        cfg = parse_arch("3x3,dram_count=3")
        west = [n for n in cfg.dram_nodes() if n.x == 0]
        east = [n for n in cfg.dram_nodes() if n.x == 4]
        assert len(west) == 2 and len(east) == 1
