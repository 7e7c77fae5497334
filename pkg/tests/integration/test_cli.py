"""Integration tests for the command-line surface."""

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from walklab.cli.main import main


class TestVerifyCommand:
    """Test the exhaustive verification command."""

    def test_small_run_passes(self, capsys: pytest.CaptureFixture[str]):
        assert main(["verify", "--K-max", "2"]) == 0

        out = capsys.readouterr().out
        assert "PASS zero_sum" in out
        assert "FAIL" not in out

    def test_injected_fault_exits_one(self, capsys: pytest.CaptureFixture[str]):
        """Test a flipped sign is reported with its counterexample."""
        assert main(["verify", "--K-max", "2", "--inject-fault"]) == 1

        out = capsys.readouterr().out
        assert 'FAIL zero_sum: {"K": 1, "h": 1, "z": [0, 1]}' in out

    def test_capacity_exits_two(self):
        with patch("walklab.services.path_service.settings") as mock_settings:
            mock_settings.enumeration_cap = 1
            assert main(["verify", "--K-max", "2"]) == 2


class TestVarianceCommand:
    """Test exact variance printing."""

    def test_three_methods_agree(self, capsys: pytest.CaptureFixture[str]):
        assert main(["variance", "--K", "4", "--h", "0", "--method", "all"]) == 0

        out = capsys.readouterr().out
        assert out.count("8/19 ~ 0.421052631579") == 3

    def test_rigid_dimer(self, capsys: pytest.CaptureFixture[str]):
        assert main(["variance", "--K", "1", "--h", "1"]) == 0

        assert capsys.readouterr().out.strip() == "formula: 1/1 ~ 1"

    def test_large_K_via_lazy_walk(self, capsys: pytest.CaptureFixture[str]):
        assert main(["variance", "--K", "100", "--h", "0", "--method", "llt"]) == 0

        value = float(capsys.readouterr().out.rsplit("~", 1)[1])
        assert abs(100 * value - 2) < 0.1

    def test_invalid_gap_exits_two(self):
        assert main(["variance", "--K", "3", "--h", "0"]) == 2

    def test_state_cap_exits_two(self):
        with patch("walklab.services.chain_service.settings") as mock_settings:
            mock_settings.state_cap = 10
            assert main(["variance", "--K", "30", "--h", "0", "--method", "stationary"]) == 2

    def test_missing_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["variance", "--K", "4"])

        assert exc_info.value.code == 2


class TestSimulateCommand:
    """Test Monte Carlo runs and their artifacts."""

    def _run(self, out: Path, parallelism: int = 1) -> int:
        return main([
            "simulate", "--K", "2", "--h", "2", "--n", "200", "--replicas", "300",
            "--seed", "42", "--parallelism", str(parallelism), "--out", str(out),
        ])

    def test_report_is_deterministic(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]):
        """Test reruns and other worker counts give byte-identical reports."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        pooled = {workers: tmp_path / f"pool{workers}.json" for workers in (4, 16)}

        assert self._run(first) == 0
        assert self._run(second) == 0
        for workers, path in pooled.items():
            assert self._run(path, parallelism=workers) == 0

        assert first.read_bytes() == second.read_bytes()
        assert all(path.read_bytes() == first.read_bytes() for path in pooled.values())
        report = json.loads(first.read_text())
        assert report["exact_value_numerator"] == 1
        assert report["exact_value_denominator"] == 1
        assert abs(report["estimate"] - 1) < 4 * report["std_error"]
        assert "z-score" in capsys.readouterr().out

    def test_single_replica_writes_trajectory(self, capsys: pytest.CaptureFixture[str]):
        assert main(["simulate", "--K", "4", "--h", "0", "--n", "20", "--stride", "5"]) == 0

        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "step,z1,twice_area"
        assert [line.split(",")[0] for line in lines[1:]] == ["0", "5", "10", "15", "20"]

    def test_trajectory_and_report(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]):
        trajectory = tmp_path / "traj.csv"

        assert main([
            "simulate", "--K", "2", "--h", "0", "--n", "50", "--replicas", "10",
            "--seed", "3", "--trajectory-out", str(trajectory), "--unconstrained",
        ]) == 0

        assert trajectory.read_text().startswith("step,z1,twice_area")
        report = json.loads(capsys.readouterr().out)
        assert report["exact_value_numerator"] == 1
        assert report["exact_value_denominator"] == 2

    def test_unwritable_output(self, tmp_path: Path):
        missing = tmp_path / "missing" / "report.json"

        assert main([
            "simulate", "--K", "2", "--h", "2", "--n", "10", "--replicas", "4", "--out", str(missing),
        ]) == 2

    def test_invalid_replicas(self):
        assert main(["simulate", "--K", "2", "--h", "2", "--replicas", "0"]) == 2


class TestTableCommands:
    """Test the table, scan and llt commands."""

    def test_table(self, capsys: pytest.CaptureFixture[str]):
        assert main(["table", "--K-max", "10"]) == 0

        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("K,sigma2_num,sigma2_den")
        assert [line.split(",")[0] for line in lines[1:]] == ["2", "4", "6", "8", "10"]
        assert lines[2].startswith("4,8,19,")
        assert all(line.endswith(",0") for line in lines[1:])

    def test_table_single_variant(self, capsys: pytest.CaptureFixture[str]):
        assert main(["table", "--K-max", "4", "--variant", "u"]) == 0

        lines = capsys.readouterr().out.splitlines()
        assert lines[0].endswith(",u_K,flagged")
        assert "sigma2_star_num" not in lines[0]
        assert len(lines[2].split(",")) == 8

    def test_scan(self, tmp_path: Path):
        out = tmp_path / "scan.csv"

        assert main(["scan", "--K-max", "20", "--h", "0", "--alpha", "0.5", "--out", str(out)]) == 0

        rows = out.read_text().splitlines()
        assert rows[0].endswith(",rule")
        rules = {row.rsplit(",", 1)[1] for row in rows[1:]}
        assert rules == {"h=0", "alpha=0.5"}

    def test_llt(self, capsys: pytest.CaptureFixture[str]):
        assert main(["llt", "--n-min", "10", "--n-max", "20", "--K-max", "20"]) == 0

        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"llt_constant", "upper_bound", "lower_bound"}
        assert report["upper_bound"]["violations"] == []
        assert report["lower_bound"]["first_K_holding"] == 2
