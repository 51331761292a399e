import json
import os

import numpy as np
import pytest

from bozklab.cli import main

SIMULATE_CFG = """
[experiment]
kind = simulate
seed = 5

[grid]
nx = 32
ny = 32
lx = 20.0
ly = 20.0

[solver]
alpha = 0.5
dt = 0.01
t_end = 0.1
observer_stride = 5

[datum]
kind = gaussian
amplitude = 0.5
width_x = 2.0
width_y = 2.0

[wrap]
threshold = 1e-3
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCutoffCheck:
    def test_pass_exit_zero(self, capsys):
        assert main(["cutoff-check", "--eps", "1.0", "--b", "5.0"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_invalid_family_exit_two(self, capsys):
        assert main(["cutoff-check", "--eps", "1.0", "--b", "4.0"]) == 2


class TestInequalityCommand:
    def test_writes_csv_and_summary(self, tmp_path, capsys):
        code = main([
            "inequality", "--kind", "kato_ponce", "--s", "1.0", "--p", "2",
            "--trials", "12", "--seed", "3", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "ratios.csv").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["kind"] == "kato_ponce"
        assert summary["max_ratio"] > 0
        rows = (tmp_path / "ratios.csv").read_text().splitlines()
        assert rows[0] == "trial,ratio"
        assert len(rows) == 13


class TestCommutatorCommand:
    def test_runs_with_flags(self, tmp_path, capsys):
        code = main([
            "commutator-norms", "--a", "2.0", "--n", "0", "--b", "0.0",
            "--grid", "128,256", "--h", "gaussian:3", "--box", "40.0",
            "--out", str(tmp_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "C_emp" in out and "stability factor" in out
        assert (tmp_path / "norms.csv").exists()

    def test_admissibility_flag_check(self, tmp_path, capsys):
        code = main([
            "commutator-norms", "--a", "2.0", "--n", "0", "--b", "2.0",
            "--out", str(tmp_path),
        ])
        assert code == 2


class TestSimulateCommand:
    def test_full_run_artifacts(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", SIMULATE_CFG)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        for name in ("series.csv", "series.json", "manifest.json", "checkpoint.field", "plot_series.py"):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["kind"] == "simulate"
        assert manifest["exit_code"] == 0
        assert "conservation" in manifest["results"]

    def test_reproducible_csv_bytes(self, tmp_path):
        cfg = write(tmp_path, "run.ini", SIMULATE_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(b)]) == 0
        assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()

    def test_resume_continues(self, tmp_path):
        cfg = write(tmp_path, "run.ini", SIMULATE_CFG)
        first = tmp_path / "first"
        assert main(["simulate", "--config", cfg, "--out", str(first)]) == 0
        cfg2 = write(tmp_path, "run2.ini", SIMULATE_CFG.replace("t_end = 0.1", "t_end = 0.2"))
        second = tmp_path / "second"
        assert main(["simulate", "--config", cfg2, "--out", str(second), "--resume", str(first)]) == 0
        manifest = json.loads((second / "manifest.json").read_text())
        assert manifest["results"]["resumed_from"]["t"] == pytest.approx(0.1)

    def test_validation_failure_exit_two(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.ini", SIMULATE_CFG.replace("alpha = 0.5", "alpha = 7"))
        assert main(["simulate", "--config", cfg]) == 2
        assert "solver.alpha" in capsys.readouterr().err

    def test_wrap_contamination_exit_four(self, tmp_path, capsys):
        # a datum parked on the seam trips the wrap threshold immediately
        text = SIMULATE_CFG.replace("threshold = 1e-3", "threshold = 1e-10")
        text = text.replace("width_x = 2.0", "width_x = 2.0\ncenter_x = 9.5")
        cfg = write(tmp_path, "seam.ini", text)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 4

    def test_blowup_exit_three(self, tmp_path):
        text = SIMULATE_CFG.replace("amplitude = 0.5", "amplitude = 1e30")
        text = text.replace("dt = 0.01", "dt = 0.1").replace("t_end = 0.1", "t_end = 2.0")
        cfg = write(tmp_path, "blow.ini", text)
        out = tmp_path / "o"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert "blowup" in manifest["results"]

    def test_kind_mismatch_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", SIMULATE_CFG)
        assert main(["kato", "--config", cfg]) == 2


class TestSweep:
    def test_dispatches_to_subdirs(self, tmp_path):
        cfg1 = write(tmp_path, "one.ini", SIMULATE_CFG)
        cfg2 = write(tmp_path, "two.ini", SIMULATE_CFG.replace("seed = 5", "seed = 6"))
        out = tmp_path / "sweep"
        assert main(["sweep", "--configs", cfg1, cfg2, "--out", str(out)]) == 0
        assert (out / "one" / "series.csv").exists()
        assert (out / "two" / "series.csv").exists()


class TestLinearDecayCommand:
    def test_rough_mode_manifest(self, tmp_path):
        text = """
[experiment]
kind = linear-decay
seed = 1

[grid]
nx = 16
ny = 1024
lx = 6.283185307179586
ly = 800.0

[solver]
alpha = 0.5

[datum]
kind = carrier
k_index = 1
width_y = 2.0

[decay]
mode = rough
t_min = 1.0
t_max = 30.0
num_times = 8

[wrap]
axes = y
threshold = 1e-8
"""
        cfg = write(tmp_path, "decay.ini", text)
        out = tmp_path / "out"
        assert main(["linear-decay", "--config", cfg, "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        fit = manifest["results"]["fit"]
        assert abs(fit["slope"] - fit["target_slope"]) < 0.1
        assert (out / "decay.csv").exists()
