"""Tests for the command-line driver."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from chiplet_lab.cli import build_parser, bundled_workloads, main


def write_tiny(dirpath: Path, name: str = "tiny") -> Path:
    path = dirpath / f"{name}.json"
    path.write_text(json.dumps({
        "name": name,
        "layers": [
            {"id": "c1", "op": "Conv",
             "dims": {"C": 3, "K": 32, "R": 1, "S": 1, "H": 16, "W": 16}},
            {"id": "c2", "op": "Conv", "preds": ["c1"],
             "dims": {"C": 32, "K": 32, "R": 1, "S": 1, "H": 16, "W": 16}},
        ],
    }))
    return path


class TestParser:
    def test_defaults(self):
        args = build_parser().parse_args([])
        assert args.workloads == []
        assert args.arch == []
        assert args.policy == "all"
        assert args.format == "csv"
        assert args.jobs == 1

    def test_flags(self):
        args = build_parser().parse_args([
            "--workloads", "a.json", "--workloads", "b.json",
            "--arch", "3x3", "--policy", "pipeline:2", "--format", "json",
            "--normalize", "--store-and-forward", "--serial-multicast",
            "--jobs", "4", "--out", "/tmp/x",
        ])
        assert args.workloads == ["a.json", "b.json"]
        assert args.arch == ["3x3"]
        assert args.normalize and args.store_and_forward and args.serial_multicast
        assert args.jobs == 4

    def test_bundled_inventory(self):
        names = set(bundled_workloads())
        assert len(names) == 12
        assert {"resnet50", "gnmt", "tf", "densenet"} <= names


class TestRuns:
    def test_single_pair_layout(self, tmp_path):
        wl = write_tiny(tmp_path)
        out = tmp_path / "out"
        rc = main(["--workloads", str(wl), "--arch", "3x3", "--out", str(out)])
        assert rc == 0
        pair = out / "tiny" / "3x3"
        for name in ("trace.csv", "breakdown.csv", "mcast_hist.csv",
                     "hop_hist.csv", "summary.json"):
            assert (pair / name).is_file(), name
        assert (out / "breakdown.csv").is_file()
        assert (out / "summary.json").is_file()

    def test_bundled_name_resolves(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["--workloads", "tf_cell", "--arch", "1x2",
                   "--out", str(out)])
        assert rc == 0
        assert (out / "tf_cell" / "1x2" / "trace.csv").is_file()

    def test_unknown_workload_exits_2(self, tmp_path, capsys):
        rc = main(["--workloads", "no_such_net", "--out", str(tmp_path)])
        assert rc == 2
        assert "no_such_net" in capsys.readouterr().err

    def test_failure_isolated(self, tmp_path, capsys):
        ok = write_tiny(tmp_path, "good")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"name": "bad", "layers": [
            {"id": "fc", "op": "Fc", "dims": {"M": 1, "K": 1, "N": 1}},
        ]}))
        out = tmp_path / "out"
        rc = main(["--workloads", str(ok), "--workloads", str(bad),
                   "--arch", "3x3", "--out", str(out)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "bad/3x3" in err
        # the good pair still produced its reports
        assert (out / "good" / "3x3" / "trace.csv").is_file()
        assert not (out / "bad" / "3x3" / "trace.csv").exists()

    def test_rerun_byte_identical(self, tmp_path):
        wl = write_tiny(tmp_path)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        for out in (out1, out2):
            rc = main(["--workloads", str(wl), "--arch", "3x3",
                       "--arch", "1x2", "--out", str(out)])
            assert rc == 0
        for rel in ("breakdown.csv", "summary.json",
                    "tiny/3x3/trace.csv", "tiny/1x2/trace.csv"):
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel

    def test_parallel_jobs_match_serial(self, tmp_path):
        wl = write_tiny(tmp_path)
        s, p = tmp_path / "serial", tmp_path / "par"
        base = ["--workloads", str(wl), "--arch", "1x2", "--arch", "3x3"]
        assert main(base + ["--out", str(s)]) == 0
        assert main(base + ["--out", str(p), "--jobs", "2"]) == 0
        for rel in ("breakdown.csv", "summary.json", "tiny/3x3/trace.csv"):
            assert (s / rel).read_bytes() == (p / rel).read_bytes(), rel

    def test_out_env_fallback(self, tmp_path, monkeypatch):
        wl = write_tiny(tmp_path)
        env_out = tmp_path / "envout"
        monkeypatch.setenv("CHIPLET_LAB_OUT", str(env_out))
        rc = main(["--workloads", str(wl), "--arch", "1x2"])
        assert rc == 0
        assert (env_out / "tiny" / "1x2" / "trace.csv").is_file()

    def test_json_format(self, tmp_path):
        wl = write_tiny(tmp_path)
        out = tmp_path / "out"
        rc = main(["--workloads", str(wl), "--arch", "1x2",
                   "--out", str(out), "--format", "json"])
        assert rc == 0
        pair = out / "tiny" / "1x2"
        assert (pair / "summary.json").is_file()
        assert not (pair / "breakdown.csv").exists()
        assert (pair / "trace.csv").is_file()

    def test_arch_file(self, tmp_path):
        wl = write_tiny(tmp_path)
        arch = tmp_path / "wide.cfg"
        arch.write_text("grid = 3x3\nnop_bpc = 8\n")
        out = tmp_path / "out"
        rc = main(["--workloads", str(wl), "--arch", str(arch),
                   "--out", str(out)])
        assert rc == 0
        assert (out / "tiny" / "wide" / "trace.csv").is_file()

    def test_glob_workloads(self, tmp_path):
        write_tiny(tmp_path, "net_a")
        write_tiny(tmp_path, "net_b")
        out = tmp_path / "out"
        rc = main(["--workloads", str(tmp_path / "net_*.json"),
                   "--arch", "1x2", "--out", str(out)])
        assert rc == 0
        assert (out / "net_a" / "1x2" / "trace.csv").is_file()
        assert (out / "net_b" / "1x2" / "trace.csv").is_file()

    def test_policy_flag(self, tmp_path):
        wl = write_tiny(tmp_path)
        out = tmp_path / "out"
        rc = main(["--workloads", str(wl), "--arch", "3x3",
                   "--policy", "pipeline:1", "--out", str(out)])
        assert rc == 0
        trace = (out / "tiny" / "3x3" / "trace.csv").read_text()
        assert trace.count("\n") > 1

    def test_stdout_progress(self, tmp_path, capsys):
        wl = write_tiny(tmp_path)
        rc = main(["--workloads", str(wl), "--arch", "1x2",
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "tiny/1x2" in out
        assert "makespan=" in out
