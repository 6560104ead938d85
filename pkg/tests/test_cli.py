import json

import numpy as np
import pytest

from aecomm import cli, comm


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


TRAIN_SMOKE = {
    "M": 4,
    "batch_size": 64,
    "architecture": "proposed",
    "data_budget": 25600,
    "tx_hidden": [32],
    "rx_hidden": [32],
    "val_batches": 10,
    "val_batch_size": 500,
}

COMPARE_SMOKE = {
    "M": 4,
    "batch_sizes": [8, 16],
    "init_seeds": [0],
    "data_seeds": [100],
    "data_budget": 1600,
    "tx_hidden": [16],
    "rx_hidden": [16],
    "val_batches": 3,
    "val_batch_size": 100,
}


class TestConfigValidation:
    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"M": 4, "bogus": 1})
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_bad_value_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"architecture": "magic"})
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert cli.main(["train", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2

    def test_missing_required_key_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {})
        assert cli.main(["ser", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_runtime_failure_exits_1(self, tmp_path):
        # non-power-of-2 M passes the schema but fails at run construction
        cfg = write_config(tmp_path, "c.json", {"M": 6})
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


class TestNormErrorCommand:
    def test_minimal_config_one_row(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "ne.json",
            {"M_list": [4], "batch_sizes": [8], "n_inits": 1, "n_batches": 1, "tx_hidden": [10]},
        )
        assert cli.main(["norm-error", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        lines = (tmp_path / "o" / "norm_error.csv").read_text().splitlines()
        assert lines[0] == "M,Bs,mean_error,std_error,n"
        assert len(lines) == 2

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "ne.json",
            {"M_list": [4, 16], "batch_sizes": [4, 16], "n_inits": 2, "n_batches": 20, "tx_hidden": [10]},
        )
        cli.main(["norm-error", "--config", cfg, "--out", str(tmp_path / "a")])
        cli.main(["norm-error", "--config", cfg, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "norm_error.csv").read_bytes() == (
            tmp_path / "b" / "norm_error.csv"
        ).read_bytes()


class TestTrainCommand:
    def test_smoke_run_perfect_accuracy(self, tmp_path):
        cfg = write_config(tmp_path, "t.json", TRAIN_SMOKE)
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        doc = json.loads((tmp_path / "o" / "run.json").read_text())
        assert doc["validation_accuracy"] == 1.0
        assert doc["steps_taken"] == 25600 // 64

    def test_exported_constellation_power(self, tmp_path):
        cfg = write_config(tmp_path, "t.json", TRAIN_SMOKE)
        cli.main(["train", "--config", cfg, "--out", str(tmp_path / "o")])
        points = comm.load_constellation_csv(tmp_path / "o" / "constellation.csv")
        assert np.mean(np.sum(points * points, axis=1)) == pytest.approx(1.0, rel=1e-9)

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, "t.json", TRAIN_SMOKE)
        cli.main(["train", "--config", cfg, "--out", str(tmp_path / "a")])
        cli.main(["train", "--config", cfg, "--out", str(tmp_path / "b")])
        for name in ("run.json", "constellation.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestCompareCommand:
    def test_rows_and_byte_identical_rerun(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", COMPARE_SMOKE)
        assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1"]) == 0
        lines = (tmp_path / "a" / "accuracy.csv").read_text().splitlines()
        assert lines[0] == "arch,Bs,init_seed,data_seed,accuracy"
        assert len(lines) == 1 + 2 * 2  # two batch sizes x two architectures
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "1"])
        assert (tmp_path / "a" / "accuracy.csv").read_bytes() == (
            tmp_path / "b" / "accuracy.csv"
        ).read_bytes()

    def test_workers_match_serial(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", COMPARE_SMOKE)
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1"])
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "2"])
        assert (tmp_path / "a" / "accuracy.csv").read_bytes() == (
            tmp_path / "b" / "accuracy.csv"
        ).read_bytes()

    def test_resume_from_partial(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", COMPARE_SMOKE)
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "full"), "--workers", "1"])
        full = (tmp_path / "full" / "accuracy.csv").read_text()
        # keep header plus the first completed pair, then resume
        partial_dir = tmp_path / "part"
        partial_dir.mkdir()
        (partial_dir / "accuracy.csv").write_text("".join(full.splitlines(keepends=True)[:3]))
        cli.main(["compare", "--config", cfg, "--out", str(partial_dir), "--workers", "1"])
        assert (partial_dir / "accuracy.csv").read_text() == full

    def test_completed_output_untouched(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", COMPARE_SMOKE)
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1"])
        before = (tmp_path / "a" / "accuracy.csv").read_bytes()
        cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1"])
        assert (tmp_path / "a" / "accuracy.csv").read_bytes() == before


class TestSerCommand:
    def test_missing_run_json_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, "s.json", {"run_json": str(tmp_path / "nope.json")})
        assert cli.main(["ser", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_sweep_on_trained_model(self, tmp_path):
        tcfg = write_config(tmp_path, "t.json", TRAIN_SMOKE)
        cli.main(["train", "--config", tcfg, "--out", str(tmp_path / "run")])
        scfg = write_config(
            tmp_path,
            "s.json",
            {
                "run_json": str(tmp_path / "run" / "run.json"),
                "snr_db_list": [0, 4, 8, 12, 16, 20],
                "n_symbols": 20000,
            },
        )
        assert cli.main(["ser", "--config", scfg, "--out", str(tmp_path / "o")]) == 0
        lines = (tmp_path / "o" / "ser.csv").read_text().splitlines()
        assert lines[0] == "snr_db,ser,ci_lo,ci_hi"
        rows = [list(map(float, line.split(","))) for line in lines[1:]]
        # non-increasing within the CI width
        for a, b in zip(rows, rows[1:]):
            assert b[1] <= a[1] + (a[3] - a[2])

    def test_rerun_byte_identical(self, tmp_path):
        tcfg = write_config(tmp_path, "t.json", TRAIN_SMOKE)
        cli.main(["train", "--config", tcfg, "--out", str(tmp_path / "run")])
        scfg = write_config(
            tmp_path,
            "s.json",
            {"run_json": str(tmp_path / "run" / "run.json"), "n_symbols": 5000},
        )
        cli.main(["ser", "--config", scfg, "--out", str(tmp_path / "a")])
        cli.main(["ser", "--config", scfg, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "ser.csv").read_bytes() == (tmp_path / "b" / "ser.csv").read_bytes()
