import json
import os
import subprocess
import sys

import numpy as np
import pytest

from signopt import cli


def minimal_config(**over):
    cfg = {
        "graph": {"n": 2, "edges": [[0, 1, 1.0]]},
        "locals": [{"abs": {"s": 0.0}}, {"abs": {"s": 2.0}}],
        "algorithm": "algo1",
        "lambda": 1.05,
        "schedule": {"affine": [10, 10]},
        "steps": 500,
        "x0": {"spread": [0, 2]},
        "record_stride": 50,
    }
    cfg.update(over)
    return cfg


def write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestRunCommand:
    def test_minimal_run_writes_csv(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            outputs={"csv": "out.csv"}))
        assert cli.main(["run", cfgp]) == 0
        lines = (tmp_path / "out.csv").read_text().split("\n")
        assert lines[0] == "k,x_0,x_1,v,xbar,d,min_gap"
        assert len(lines) == 1 + 11 + 1  # header + rows + trailing newline
        assert "run ok" in capsys.readouterr().out

    def test_strict_lambda_violation_exits_2(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            **{"lambda": 0.5, "strict": True}))
        assert cli.main(["run", cfgp]) == 2
        assert "lambda" in capsys.readouterr().err

    def test_rerun_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            outputs={"csv": "a.csv", "svg": "a.svg", "report": "a.json"}))
        assert cli.main(["run", cfgp]) == 0
        first = {n: (tmp_path / n).read_bytes() for n in ("a.csv", "a.svg", "a.json")}
        assert cli.main(["run", cfgp]) == 0
        for n, data in first.items():
            assert (tmp_path / n).read_bytes() == data

    def test_numeric_abort_exits_3(self, tmp_path, capsys):
        cfg = minimal_config(
            locals=[{"quadratic": {"a": 1.0, "b": 0.0}},
                    {"quadratic": {"a": 1.0, "b": 2.0}}],
            schedule={"constant": 10.0},
            steps=1000,
        )
        cfgp = write_config(tmp_path, "c.json", cfg)
        assert cli.main(["run", cfgp]) == 3
        assert "numeric abort" in capsys.readouterr().err

    def test_missing_and_malformed_configs_exit_2(self, tmp_path, capsys):
        assert cli.main(["run", str(tmp_path / "nope.json")]) == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["run", str(bad)]) == 2

    def test_auto_lambda_and_bounds_report(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = minimal_config(
            **{"lambda": "auto", "schedule": {"constant": 0.01},
               "steps": 2000, "record_stride": 100,
               "bounds": ["constant_gap"],
               "outputs": {"report": "r.json"}})
        cfgp = write_config(tmp_path, "c.json", cfg)
        assert cli.main(["run", cfgp]) == 0
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["summary"]["lambda"] == pytest.approx(1.05)  # 1.05 * bound 1.0
        assert doc["bounds"][0]["bound"] == "constant_gap"
        assert doc["bounds"][0]["pass"] is True

    def test_missing_noise_seed_exits_2(self, tmp_path, capsys):
        cfg = minimal_config(algorithm="algo2", noise={"sigma": 1.0})
        cfgp = write_config(tmp_path, "c.json", cfg)
        assert cli.main(["run", cfgp]) == 2
        assert "seed" in capsys.readouterr().err

    def test_disconnected_graph_rejected(self, tmp_path, capsys):
        cfg = minimal_config(graph={"n": 3, "edges": [[0, 1, 1.0]]},
                             locals=[{"abs": {"s": 0.0}}] * 3,
                             x0={"zeros": 3})
        cfgp = write_config(tmp_path, "c.json", cfg)
        assert cli.main(["run", cfgp]) == 2
        assert "connected" in capsys.readouterr().err


class TestSvgOutput:
    def test_svg_is_self_contained(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            outputs={"svg": "t.svg"}, svg_size=[640, 400]))
        assert cli.main(["run", cfgp]) == 0
        svg = (tmp_path / "t.svg").read_text()
        assert svg.startswith("<svg")
        assert svg.rstrip().endswith("</svg>")
        assert 'width="640"' in svg and 'height="400"' in svg
        # no external resources: the only URL is the xmlns declaration
        assert "href" not in svg
        assert svg.count("http") == 1
        assert ">k</text>" in svg and ">state</text>" in svg


class TestSweepCommand:
    def test_single_point_grid_matches_run(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            outputs={"csv": "direct.csv"}))
        gridp = write_config(tmp_path, "g.json", {"lambda": [1.05]})
        monkeypatch.setenv("SIGNOPT_THREADS", "1")
        assert cli.main(["run", cfgp]) == 0
        assert cli.main(["sweep", cfgp, "--grid", gridp, "--out", "s.csv"]) == 0
        direct_rows = (tmp_path / "direct.csv").read_text().strip().split("\n")
        terminal_v_direct = float(direct_rows[-1].split(",")[3])
        sweep_rows = (tmp_path / "s.csv").read_text().strip().split("\n")
        assert len(sweep_rows) == 2
        row = dict(zip(sweep_rows[0].split(","), sweep_rows[1].split(",")))
        assert float(row["terminal_v"]) == terminal_v_direct
        assert row["diverged"] == "false"

    def test_pool_size_does_not_change_output(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            algorithm="algo2", noise={"sigma": 1.0, "seed": 0}))
        gridp = write_config(tmp_path, "g.json",
                             {"lambda": [1.05, 2.0], "seeds": [0, 1, 2]})
        outputs = []
        for workers in ("1", "3"):
            monkeypatch.setenv("SIGNOPT_THREADS", workers)
            assert cli.main(["sweep", cfgp, "--grid", gridp,
                             "--out", f"s{workers}.csv"]) == 0
            outputs.append((tmp_path / f"s{workers}.csv").read_bytes())
        assert outputs[0] == outputs[1]
        assert b"\r" not in outputs[0]  # LF-only, locale-independent

    def test_lambda_sweep_shows_consensus_transition(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            schedule={"affine": [10, 10]}, steps=20_000, record_stride=1000))
        gridp = write_config(tmp_path, "g.json", {"lambda": [0.5, 0.9, 1.05, 2.0]})
        monkeypatch.setenv("SIGNOPT_THREADS", "2")
        assert cli.main(["sweep", cfgp, "--grid", gridp, "--out", "s.csv"]) == 0
        rows = (tmp_path / "s.csv").read_text().strip().split("\n")
        head = rows[0].split(",")
        table = [dict(zip(head, r.split(","))) for r in rows[1:]]
        assert [r["above_bound"] for r in table] == ["false", "false", "true", "true"]
        vs = [float(r["terminal_v"]) for r in table]
        assert vs[0] > 1.0 and vs[1] > 1.0      # below the critical bound
        assert vs[2] < 0.05 and vs[3] < 0.05    # above it


class TestReproduceCommand:
    def test_fig3_artifacts_and_expectations(self, tmp_path):
        out = str(tmp_path / "rep")
        assert cli.main(["reproduce", "fig3", "--out", out]) == 0
        report = json.loads((tmp_path / "rep" / "fig3_report.json").read_text())
        assert report["figure"] == "fig3"
        labels = [r["label"] for r in report["runs"]]
        assert labels == ["lam0.95", "lam1.05", "lam10"]
        for r in report["runs"]:
            assert all(e["pass"] for e in r["expectations"])
        for label in labels:
            assert (tmp_path / "rep" / f"fig3_{label}.csv").exists()
            assert (tmp_path / "rep" / f"fig3_{label}.svg").exists()


class TestBackendOverride:
    def test_numpy_backend_produces_identical_csv(self, tmp_path):
        cfgp = write_config(tmp_path, "c.json", minimal_config(
            outputs={"csv": str(tmp_path / "out.csv")}))
        env = dict(os.environ)
        outputs = {}
        for backend in ("numba", "numpy"):
            env["SIGNOPT_BACKEND"] = backend
            r = subprocess.run(
                [sys.executable, "-m", "signopt.cli", "run", cfgp],
                env=env, capture_output=True, text=True, cwd=str(tmp_path),
            )
            assert r.returncode == 0, r.stderr
            outputs[backend] = (tmp_path / "out.csv").read_bytes()
        assert outputs["numba"] == outputs["numpy"]
