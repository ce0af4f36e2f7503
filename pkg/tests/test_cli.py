import subprocess
import sys

import pytest

from artx.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

SMALL = ["--set", "total_env_steps=128", "--set", "ppo.steps_per_rollout=128",
         "--set", "ppo.minibatch_size=64", "--set", "net.hidden=8"]


@pytest.fixture
def trained(tmp_path):
    out = tmp_path / "run"
    assert main(["train", *SMALL, "--set", f"out_dir={out}"]) == EXIT_OK
    return out


class TestTrain:
    def test_writes_artifacts(self, trained):
        assert (trained / "metrics.csv").is_file()
        assert (trained / "policy.mlp").is_file()

    def test_bad_key(self, tmp_path, capsys):
        assert main(["train", "--set", "nonsense=1"]) == EXIT_CONFIG
        assert "nonsense" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "absent.txt")]) == EXIT_CONFIG

    def test_unwritable_out_dir(self, tmp_path):
        blocker = tmp_path / "f"
        blocker.write_text("")
        assert main(["train", *SMALL, "--set", f"out_dir={blocker}/x"]) == EXIT_RUNTIME


class TestSuiteAndPlot:
    def test_round_trip(self, tmp_path, capsys):
        out = tmp_path / "suite"
        code = main(["suite", *SMALL, "--set", f"out_dir={out}", "--seeds", "1,2", "--variants", "none,art-hl"])
        assert code == EXIT_OK
        agg = out / "aggregate.csv"
        assert agg.is_file()
        assert main(["plot", "--input", str(agg), "--out", str(tmp_path / "svg")]) == EXIT_OK
        assert len(list((tmp_path / "svg").glob("*.svg"))) == 4

    def test_unknown_variant(self, tmp_path):
        assert main(["suite", *SMALL, "--set", f"out_dir={tmp_path}", "--variants", "icm"]) == EXIT_CONFIG

    def test_plot_bad_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x\n")
        assert main(["plot", "--input", str(bad), "--out", str(tmp_path)]) == EXIT_RUNTIME
        assert "line 1" in capsys.readouterr().err


class TestPlay:
    def test_trace(self, trained, capsys):
        capsys.readouterr()
        code = main(["play", "--policy", str(trained / "policy.mlp"), "--seed", "1", "--max-steps", "20"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("step 0\n")
        assert "episode total" in out

    def test_missing_policy(self, tmp_path):
        assert main(["play", "--policy", str(tmp_path / "none.mlp")]) == EXIT_RUNTIME


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artx.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "train" in proc.stdout
