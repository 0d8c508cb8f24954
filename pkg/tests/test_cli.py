import subprocess
import sys

import pytest


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "packnap", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """One tiny experiment reused by the run/report assertions."""
    out = tmp_path_factory.mktemp("results")
    proc = run_cli("run", "--framework", "bma", "--trials", "2", "--horizon", "4",
                   "--seed", "3", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out


class TestGenerate:
    def test_writes_stream(self, tmp_path):
        out = tmp_path / "stream.csv"
        proc = run_cli("generate", "--seed", "5", "--horizon", "6", "--out", str(out))
        assert proc.returncode == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("t,x1,x2,x3,a11")
        assert len(lines) == 7

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("generate", "--seed", "5", "--horizon", "6", "--out", str(a))
        run_cli("generate", "--seed", "5", "--horizon", "6", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestRun:
    def test_outputs_present(self, run_dir):
        for name in ("stages_bma.csv", "summary_bma.csv",
                     "curve_reward_bma.csv", "curve_feasibility_bma.csv"):
            assert (run_dir / name).exists()

    def test_summary_on_stdout(self, run_dir):
        proc = run_cli("run", "--framework", "pto", "--trials", "1", "--horizon", "3",
                       "--seed", "1", "--out", str(run_dir))
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0].startswith("framework,trials,T,mean_r_T")
        assert proc.stdout.splitlines()[1].startswith("pto,1,3,")

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("framework = pto\nhorizon = 5\ntrials = 3\nbase_seed = 2\n",
                       encoding="utf-8")
        out = tmp_path / "res"
        proc = run_cli("run", "--config", str(cfg), "--trials", "1", "--out", str(out))
        assert proc.returncode == 0
        # flag overrides file: one trial only
        stage_lines = (out / "stages_pto.csv").read_text().strip().split("\n")
        assert len(stage_lines) == 1 + 5

    def test_unknown_flag_is_usage_error(self):
        proc = run_cli("run", "--framework", "bma", "--frobnicate", "1")
        assert proc.returncode == 2

    def test_bad_framework_is_usage_error(self):
        proc = run_cli("run", "--framework", "svm")
        assert proc.returncode == 2

    def test_numeric_config_error_exits_one(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("lambda = -0.5\n", encoding="utf-8")
        proc = run_cli("run", "--framework", "bma", "--config", str(cfg),
                       "--out", str(tmp_path / "x"))
        assert proc.returncode == 1
        assert "error" in proc.stderr.lower()


class TestReport:
    def test_report_writes_summary_curves_figures(self, run_dir):
        proc = run_cli("report", "--in", str(run_dir))
        assert proc.returncode == 0, proc.stderr
        assert (run_dir / "summary.csv").exists()
        assert (run_dir / "reward.png").exists()
        assert (run_dir / "feasibility.png").exists()
        header = (run_dir / "summary.csv").read_text().splitlines()[0]
        assert header == ("framework,trials,T,mean_r_T,std_r_T,mean_r_half,std_r_half,"
                          "mean_feas_T,std_feas_T,mean_feas_half,std_feas_half")

    def test_report_recomputes_matching_summary(self, run_dir):
        run_cli("report", "--in", str(run_dir))
        direct = (run_dir / "summary_bma.csv").read_text().splitlines()[1]
        merged = [line for line in (run_dir / "summary.csv").read_text().splitlines()[1:]
                  if line.startswith("bma,")]
        assert merged and merged[0] == direct

    def test_no_figures_flag(self, tmp_path):
        out = tmp_path / "res"
        run_cli("run", "--framework", "pto", "--trials", "1", "--horizon", "3",
                "--seed", "0", "--out", str(out))
        proc = run_cli("report", "--in", str(out), "--no-figures")
        assert proc.returncode == 0
        assert not (out / "reward.png").exists()

    def test_empty_dir_errors(self, tmp_path):
        proc = run_cli("report", "--in", str(tmp_path))
        assert proc.returncode == 1


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            proc = run_cli("run", "--framework", "bgs", "--trials", "2", "--horizon",
                           "3", "--seed", "7", "--out", str(out))
            assert proc.returncode == 0
        assert ((a / "stages_bgs.csv").read_bytes()
                == (b / "stages_bgs.csv").read_bytes())
