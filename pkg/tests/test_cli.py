"""Tests for the command-line surface and its file formats."""

import json

import numpy as np
import pytest

from sqkd.cli import load_transcript, main, transcript_to_dict, write_csv
from sqkd.channels import DepolarizingChannel
from sqkd.protocol import ProtocolConfig, run


def run_cli(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestThresholdCommand:
    def test_reference_output(self, capsys):
        status, out, _ = run_cli(capsys, "threshold", "--b", "0")
        assert status == 0
        doc = json.loads(out)
        assert abs(doc["p_star"] - 0.0692) < 0.002
        assert abs(doc["e_z_threshold"] - doc["p_star"] / 2.0) < 1e-15
        assert abs(doc["e_z_threshold"] - 0.0346) < 0.001

    def test_no_threshold_is_domain_error(self, capsys):
        status, _, err = run_cli(capsys, "threshold", "--b", "0.49")
        assert status == 2
        assert err.startswith("sqkd: error: domain:")
        assert err.count("\n") == 1


class TestKeyrateCommand:
    def test_clean_channel(self, capsys):
        status, out, _ = run_cli(capsys, "keyrate", "--b", "0", "--p", "0")
        assert status == 0
        doc = json.loads(out)
        assert doc["r_lower"] == 1.0
        assert doc["lambda"] == 1.0
        assert doc["k1"] == 1.0

    def test_reports_both_bound_routes(self, capsys):
        status, out, _ = run_cli(capsys, "keyrate", "--b", "0", "--p", "0.05")
        doc = json.loads(out)
        assert status == 0
        assert doc["bound"] > doc["bound_observable_route"] > 0.0

    def test_domain_error_exit(self, capsys):
        status, _, err = run_cli(capsys, "keyrate", "--b", "0.7", "--p", "0")
        assert status == 2 and "domain" in err
        status, _, err = run_cli(capsys, "keyrate", "--b", "0", "--p", "0.6")
        assert status == 2 and "domain" in err


class TestSimulateCommand:
    def test_noiseless_run(self, capsys, tmp_path):
        out_path = tmp_path / "t.json"
        status, _, _ = run_cli(
            capsys,
            "simulate", "--n", "20000", "--b", "0", "--p", "0", "--seed", "7",
            "--out", str(out_path),
        )
        assert status == 0
        doc = load_transcript(out_path)
        assert doc["aborted"] is False
        assert doc["test_error_rate"] == 0.0
        assert doc["sifted_a"] == doc["sifted_b"]
        assert doc["schema_version"] == 1
        assert "records" not in doc

    def test_records_flag_gates_details(self, capsys, tmp_path):
        out_path = tmp_path / "t.json"
        status, _, _ = run_cli(
            capsys,
            "simulate", "--n", "1000", "--b", "0", "--p", "0.1", "--seed", "1",
            "--records", "--out", str(out_path),
        )
        assert status == 0
        doc = load_transcript(out_path)
        assert len(doc["records"]) == 1000
        assert len(doc["test_positions"]) == doc["n_target"]

    def test_round_trip_reproduces_summary(self, capsys, tmp_path):
        config = ProtocolConfig(
            n_iterations=5000, b=0.1, reverse=DepolarizingChannel(0.2), seed=42
        )
        transcript = run(config)
        expected = transcript_to_dict(transcript)
        out_path = tmp_path / "t.json"
        status, _, _ = run_cli(
            capsys,
            "simulate", "--n", "5000", "--b", "0.1", "--p", "0.2", "--seed", "42",
            "--out", str(out_path),
        )
        assert status == 0
        assert load_transcript(out_path) == expected

    def test_byte_identical_reruns(self, capsys, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            status, _, _ = run_cli(
                capsys,
                "simulate", "--n", "2000", "--b", "0.05", "--p", "0.1", "--seed", "9",
                "--out", str(path),
            )
            assert status == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_domain_error_leaves_no_file(self, capsys, tmp_path):
        out_path = tmp_path / "t.json"
        status, _, err = run_cli(
            capsys,
            "simulate", "--n", "4", "--b", "0", "--p", "0", "--seed", "1",
            "--out", str(out_path),
        )
        assert status == 2 and "domain" in err
        assert not out_path.exists()
        assert list(tmp_path.iterdir()) == []

    def test_io_error_exit(self, capsys, tmp_path):
        status, _, err = run_cli(
            capsys,
            "simulate", "--n", "1000", "--b", "0", "--p", "0", "--seed", "1",
            "--out", str(tmp_path / "missing" / "t.json"),
        )
        assert status == 3
        assert err.startswith("sqkd: error: io:")


class TestSweepCommand:
    def test_csv_contract(self, tmp_path):
        target = tmp_path / "one.csv"
        write_csv([(0.0, 0.0, 1.0)], target)
        assert target.read_text() == "b,p,r_lower\n0,0,1.00000000\n"

    def test_empty_table_is_header_only(self, tmp_path):
        target = tmp_path / "empty.csv"
        write_csv([], target)
        assert target.read_text() == "b,p,r_lower\n"

    def test_reference_grid_crossing(self, capsys, tmp_path):
        target = tmp_path / "grid.csv"
        status, _, _ = run_cli(
            capsys,
            "sweep", "--b", "0,0.05,0.1", "--p-min", "0", "--p-max", "0.12",
            "--p-step", "0.002", "--out", str(target),
        )
        assert status == 0
        lines = target.read_text().splitlines()
        assert lines[0] == "b,p,r_lower"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 3 * 61
        zero_bias = [(float(p), float(r)) for b, p, r in rows if float(b) == 0.0]
        crossings = [
            (lo_p, hi_p)
            for (lo_p, lo_r), (hi_p, hi_r) in zip(zero_bias, zero_bias[1:])
            if lo_r > 0.0 >= hi_r
        ]
        assert len(crossings) == 1
        lo_p, hi_p = crossings[0]
        assert 0.068 <= lo_p and hi_p <= 0.070

    def test_byte_identical_reruns(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            status, _, _ = run_cli(
                capsys,
                "sweep", "--b", "0,0.1", "--p-min", "0", "--p-max", "0.05",
                "--p-step", "0.01", "--out", str(path),
            )
            assert status == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_out_of_domain_rows_marked(self, capsys, tmp_path):
        target = tmp_path / "wide.csv"
        status, _, _ = run_cli(
            capsys,
            "sweep", "--b", "0", "--p-min", "0.4", "--p-max", "0.6",
            "--p-step", "0.1", "--out", str(target),
        )
        assert status == 0
        lines = target.read_text().splitlines()[1:]
        assert len(lines) == 3
        # p = 0.5 sits on the closed-form boundary and stays evaluable;
        # p = 0.6 falls outside and is marked, not dropped.
        assert lines[0].split(",")[2] != "nan"
        assert lines[1].split(",")[2] != "nan"
        assert lines[2].split(",")[2] == "nan"

    def test_plot_rendered_alongside(self, capsys, tmp_path):
        csv_path = tmp_path / "fig.csv"
        png_path = tmp_path / "fig.png"
        status, _, _ = run_cli(
            capsys,
            "sweep", "--b", "0,0.1", "--p-min", "0", "--p-max", "0.1",
            "--p-step", "0.01", "--out", str(csv_path), "--plot", str(png_path),
        )
        assert status == 0
        assert csv_path.exists()
        assert png_path.exists() and png_path.stat().st_size > 0
        assert png_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_bad_step_is_domain_error(self, capsys, tmp_path):
        status, _, err = run_cli(
            capsys,
            "sweep", "--b", "0", "--p-min", "0", "--p-max", "0.1",
            "--p-step", "-0.01", "--out", str(tmp_path / "x.csv"),
        )
        assert status == 2 and "domain" in err
        assert not (tmp_path / "x.csv").exists()


class TestUsageErrors:
    def test_unknown_command(self, capsys):
        status, _, err = run_cli(capsys, "nosuch")
        assert status == 1
        assert err.startswith("sqkd: error: usage:")

    def test_missing_required_flag(self, capsys):
        status, _, err = run_cli(capsys, "threshold")
        assert status == 1 and "usage" in err

    def test_bad_number(self, capsys):
        status, _, err = run_cli(capsys, "threshold", "--b", "zero")
        assert status == 1 and "usage" in err

    def test_bad_b_list(self, capsys, tmp_path):
        status, _, err = run_cli(
            capsys,
            "sweep", "--b", "0,awk", "--p-min", "0", "--p-max", "0.1",
            "--p-step", "0.01", "--out", str(tmp_path / "x.csv"),
        )
        assert status == 1 and "usage" in err
