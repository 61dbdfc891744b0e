"""Tests for the command-line interface and its CSV artifacts."""

import csv
import filecmp
import subprocess
import sys

import numpy as np
import pytest

from blindeq import ExperimentConfig, run_experiment
from blindeq.cli import EXIT_DIVERGED, EXIT_IO, EXIT_OK, EXIT_USAGE, fmt, main

RUN_SUFFIXES = ["curve", "const_tx", "const_rx", "const_eq", "weights"]


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def kv_lines(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


class TestRun:
    def test_lms_writes_bundle(self, tmp_path, capsys):
        prefix = str(tmp_path / "lms")
        assert main(["run", "--channel", "h1", "--algo", "lms", "--symbols", "3000", "--out", prefix]) == EXIT_OK
        out = kv_lines(capsys.readouterr().out)
        assert "steady_state_db" in out and "conv_iteration" in out
        for suffix in RUN_SUFFIXES:
            assert (tmp_path / f"lms_{suffix}.csv").exists()
        header, rows = read_csv(tmp_path / "lms_curve.csv")
        assert header == ["iteration", "err_sq", "err_db_smoothed"]
        assert len(rows) == 3000

    def test_cma_curve_has_aligned_column(self, tmp_path, capsys):
        prefix = str(tmp_path / "c")
        assert main(["run", "--channel", "h2", "--algo", "cma12", "--symbols", "2000", "--out", prefix]) == 0
        header, _ = read_csv(tmp_path / "c_curve.csv")
        assert header == ["iteration", "err_sq", "err_db_smoothed", "aligned_err_sq"]
        assert "align_delay" in kv_lines(capsys.readouterr().out)

    def test_deterministic_files(self, tmp_path):
        args = ["run", "--algo", "cma22", "--channel", "h2", "--seed", "7", "--symbols", "4000"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        for suffix in RUN_SUFFIXES:
            assert filecmp.cmp(tmp_path / f"a_{suffix}.csv", tmp_path / f"b_{suffix}.csv", shallow=False)

    def test_lossless_round_trip(self, tmp_path):
        prefix = str(tmp_path / "r")
        main(["run", "--algo", "cma21", "--channel", "h1", "--symbols", "1500", "--seed", "2", "--out", prefix])
        rec = run_experiment(ExperimentConfig(channel="h1", algorithm="cma21", n_symbols=1500, seed=2))
        _, rows = read_csv(tmp_path / "r_const_rx.csv")
        rx = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
        np.testing.assert_array_equal(rx, rec.received)
        _, rows = read_csv(tmp_path / "r_curve.csv")
        np.testing.assert_array_equal([float(r[1]) for r in rows], rec.err_sq)
        np.testing.assert_array_equal([float(r[2]) for r in rows], rec.err_db_smoothed)
        np.testing.assert_array_equal([float(r[3]) for r in rows], rec.aligned_err_sq)
        _, rows = read_csv(tmp_path / "r_weights.csv")
        w = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
        np.testing.assert_array_equal(w, rec.final_weights)

    def test_negative_noise_is_usage_error(self, tmp_path):
        prefix = tmp_path / "bad"
        code = main(["run", "--channel", "h1", "--algo", "lms", "--noise-var", "-1", "--out", str(prefix)])
        assert code == EXIT_USAGE
        assert list(tmp_path.iterdir()) == []

    def test_bad_flag(self):
        with pytest.raises(SystemExit) as info:
            main(["run", "--channel", "h9", "--algo", "lms"])
        assert info.value.code == EXIT_USAGE

    def test_missing_algo(self):
        with pytest.raises(SystemExit) as info:
            main(["run", "--channel", "h1"])
        assert info.value.code == EXIT_USAGE

    def test_divergence_exit_no_files(self, tmp_path):
        code = main(["run", "--channel", "h1", "--algo", "cma22", "--step", "0.5",
                     "--symbols", "2000", "--out", str(tmp_path / "d")])
        assert code == EXIT_DIVERGED
        assert list(tmp_path.iterdir()) == []

    def test_io_failure(self, tmp_path):
        code = main(["run", "--channel", "h1", "--algo", "lms", "--symbols", "500",
                     "--out", str(tmp_path / "missing_dir" / "x")])
        assert code == EXIT_IO


class TestCompare:
    def test_table(self, tmp_path, capsys):
        prefix = str(tmp_path / "t")
        assert main(["compare", "--channel", "h1", "--symbols", "4000", "--out", prefix]) == 0
        header, rows = read_csv(tmp_path / "t_table.csv")
        assert header == ["algorithm", "steady_state_db", "conv_iteration", "diverged"]
        assert [r[0] for r in rows] == ["lms", "cma11", "cma12", "cma21", "cma22"]
        text = capsys.readouterr().out
        assert "steady_state_db" in text and "CMA(2,2)" in text

    @pytest.mark.slow
    def test_defaults_lms_best(self, tmp_path):
        assert main(["compare", "--channel", "h1", "--out", str(tmp_path / "t")]) == 0
        _, rows = read_csv(tmp_path / "t_table.csv")
        db = {r[0]: float(r[1]) for r in rows}
        assert min(db, key=db.get) == "lms"

    @pytest.mark.slow
    def test_seed_changes_values_not_lms_rank(self, tmp_path):
        tables = []
        for seed in ("1", "2"):
            main(["compare", "--channel", "h1", "--seed", seed, "--out", str(tmp_path / seed)])
            _, rows = read_csv(tmp_path / f"{seed}_table.csv")
            tables.append({r[0]: float(r[1]) for r in rows})
        assert all(min(t, key=t.get) == "lms" for t in tables)
        assert tables[0] != tables[1]

    def test_deterministic_table(self, tmp_path):
        args = ["compare", "--channel", "h2", "--symbols", "3000", "--seed", "5"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        assert filecmp.cmp(tmp_path / "a_table.csv", tmp_path / "b_table.csv", shallow=False)


class TestEigen:
    @pytest.mark.parametrize("channel", ["h1", "h2"])
    def test_ratio(self, channel, capsys):
        assert main(["eigen", "--channel", channel, "--symbols", "100000"]) == 0
        out = kv_lines(capsys.readouterr().out)
        assert set(out) == {"lambda_max", "lambda_min", "ratio"}
        assert 18.0 <= float(out["ratio"]) <= 20.0

    def test_too_few_symbols(self, capsys):
        assert main(["eigen", "--channel", "h1", "--symbols", "10"]) == EXIT_USAGE
        assert "1000" in capsys.readouterr().err


def test_fmt_round_trips():
    rng = np.random.default_rng(0)
    for v in rng.normal(size=1000) * 10.0 ** rng.integers(-300, 300, 1000):
        assert float(fmt(v)) == v
    assert fmt(float("nan")) == "nan"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "blindeq", "eigen", "--channel", "h2", "--symbols", "5000"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("lambda_max=")
