import csv
import subprocess
import sys

import numpy as np
import pytest

from robust_phaselift import experiments as ex
from robust_phaselift.cli import build_parser, cli_main, parse_values
from robust_phaselift.solver import SolverConfig


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestParsing:
    def test_value_lists(self):
        assert parse_values("5", int) == [5]
        assert parse_values("3,5,7", int) == [3, 5, 7]
        assert parse_values("3:17:2", int) == [3, 5, 7, 9, 11, 13, 15, 17]
        assert parse_values("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]

    def test_help_documents_every_flag(self):
        sub = build_parser()._subparsers._group_actions[0].choices
        text = sub["threshold-sweep"].format_help()
        for flag in ("--n", "--m", "--s", "--trials", "--seed", "--out", "--max-iters",
                     "--step-c", "--threads", "--format"):
            assert flag in text
        for action in sub["phase-diagram"]._actions:
            assert action.help

    @pytest.mark.parametrize("argv", [
        ["bogus"],
        ["balance"],
        ["robc", "--out", "x.csv", "--wat"],
        ["robc", "--out", "x.csv", "--trials", "0"],
        ["threshold-sweep", "--out", "x.csv", "--format", "json"],
        ["phase-diagram", "--out", "x.csv", "--n", "3:1:1"],
        ["phase-diagram", "--out", "x.csv", "--s", "1.5"],
        ["dist", "quantile", "--rho", "0.5", "--x", "1.5"],
        ["dist", "cdf", "--rho", "2", "--x", "1"],
        ["threshold-sweep", "--out", "x.csv", "--step-c", "-1"],
    ])
    def test_usage_errors_exit_1(self, argv, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert cli_main(argv) == 1

    def test_no_arguments(self):
        assert cli_main([]) == 1

    def test_help_exit_0(self, capsys):
        assert cli_main(["--help"]) == 0

    def test_runtime_failure_exit_2(self, tmp_path):
        target = tmp_path / "file"
        target.write_text("")
        # parent path is a regular file, so writing fails
        assert cli_main(["robc", "--n", "3", "--m", "30", "--trials", "2",
                         "--out", str(target / "r.csv")]) == 2


class TestSubcommands:
    def test_dist_stdout(self, capsys):
        assert cli_main(["dist", "cdf", "--rho", "1", "--x", "0.454936423119573"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "x,cdf"
        assert float(out[1].split(",")[1]) == pytest.approx(0.5, abs=1e-9)

    def test_dist_file(self, tmp_path):
        p = tmp_path / "q.csv"
        assert cli_main(["dist", "quantile", "--rho", "0.3", "--x", "0.5,0.9", "--out", str(p)]) == 0
        rows = read_csv(p)
        assert rows[0] == ["p", "quantile"] and len(rows) == 3

    def test_robc_footer(self, tmp_path):
        p = tmp_path / "r.csv"
        assert cli_main(["robc", "--n", "4", "--m", "200", "--trials", "6", "--out", str(p)]) == 0
        rows = read_csv(p)
        assert rows[0] == ["trial", "rho", "ratio"]
        assert [r[0] for r in rows[-3:]] == ["min", "mean", "theoretical"]
        ratios = [float(r[2]) for r in rows[1:-3]]
        assert float(rows[-3][2]) == pytest.approx(min(ratios), rel=1e-8)

    def test_certificate(self, tmp_path):
        p = tmp_path / "c.csv"
        assert cli_main(["certificate", "--n", "6", "--m", "600", "--trials", "3", "--out", str(p)]) == 0
        rows = read_csv(p)
        assert rows[0] == ["trial", "lambda_min_Tperp", "y_T_frobenius", "coeff_ok"]
        assert [r[3] for r in rows[1:]] == ["1", "1", "1"]

    def test_phase_diagram_and_history(self, tmp_path):
        p, h = tmp_path / "pd.csv", tmp_path / "hist.csv"
        argv = ["phase-diagram", "--n", "3", "--m", "60,120", "--s", "0,0.05", "--trials", "2",
                "--max-iters", "300", "--out", str(p), "--history", str(h)]
        assert cli_main(argv) == 0
        rows = read_csv(p)
        assert rows[0] == ["n", "m", "s", "success_rate", "mean_rel_error", "trials"]
        assert len(rows) == 1 + 4
        assert read_csv(h)[0] == ["iter", "objective"]

    def test_rademacher_noise(self, tmp_path):
        p = tmp_path / "pd.csv"
        assert cli_main(["phase-diagram", "--n", "3", "--m", "90", "--s", "0.05", "--trials", "2",
                         "--max-iters", "200", "--noise", "rademacher", "--out", str(p)]) == 0

    def test_numbers_have_nine_significant_digits(self, tmp_path):
        p = tmp_path / "s.csv"
        assert cli_main(["threshold-sweep", "--n", "3", "--m", "90", "--s", "0.05",
                         "--max-iters", "200", "--out", str(p)]) == 0
        err = read_csv(p)[1][1]
        assert err == f"{float(err):.9g}"


class TestDeterminism:
    ARGV = ["threshold-sweep", "--n", "5", "--m", "300", "--s", "0,0.05,0.1,0.15", "--trials", "3",
            "--seed", "7", "--max-iters", "400"]

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli_main(self.ARGV + ["--out", str(a)]) == 0
        assert cli_main(self.ARGV + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_does_not_matter(self, tmp_path, monkeypatch):
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        assert cli_main(self.ARGV + ["--threads", "1", "--out", str(a)]) == 0
        assert cli_main(self.ARGV + ["--threads", "3", "--out", str(b)]) == 0
        monkeypatch.setenv("RPL_THREADS", "2")
        assert cli_main(self.ARGV + ["--out", str(c)]) == 0
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_distinct_cells_distinct_streams(self):
        e1 = ex.trial_ensemble(5, 50, 0.1, 0, 1).vectors
        e2 = ex.trial_ensemble(5, 50, 0.1, 1, 1).vectors
        e3 = ex.trial_ensemble(5, 50, 0.11, 0, 1).vectors
        assert not np.array_equal(e1, e2) and not np.array_equal(e1, e3)

    def test_console_script_entry(self, tmp_path):
        p = tmp_path / "d.csv"
        r = subprocess.run([sys.executable, "-m", "robust_phaselift.cli", "dist", "pdf",
                            "--rho", "0", "--x", "1", "--out", str(p)], capture_output=True)
        assert r.returncode == 0
        assert read_csv(p)[1][1] == f"{2 / np.pi * 0.421024438240708:.9g}"


class TestExperiments:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            ex.ExperimentConfig("phase-diagram", n_values=[])
        with pytest.raises(ValueError):
            ex.ExperimentConfig("phase-diagram", trials=0)
        with pytest.raises(ValueError):
            ex.ExperimentConfig("phase-diagram", noise="gaussian")

    def test_fmt(self):
        assert ex.fmt(True) == "1" and ex.fmt(7) == "7"
        assert ex.fmt(1 / 3) == "0.333333333"
        assert ex.fmt(np.float64(1e-20)) == "1e-20"

    def test_sweep_grid(self):
        g = ex.sweep_grid(0.01)
        assert len(g) == 101 and g[0] == 0.0 and g[-1] == 1.0 and g[12] == 0.12

    def test_largest_recoverable(self):
        rows = [(0.0, 1e-6), (0.1, 0.02), (0.11, 0.5), (0.12, 0.09), (0.2, 100.0)]
        assert ex.largest_recoverable_fraction(rows) == 0.12
        assert np.isnan(ex.largest_recoverable_fraction([(0.0, 1.0)]))

    def test_threshold_sweep_rows(self):
        cfg = ex.ExperimentConfig("threshold-sweep", [4], [400], [0.0, 0.3], 2, 3,
                                  SolverConfig(max_iters=1500))
        rows = ex.run_threshold_sweep(cfg)
        assert rows[0][1] < 0.1 and rows[1][1] > 0.5
        assert rows[0][2] == 1.0 and rows[0][3] == 2
