import dataclasses
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ridgepca import cli
from ridgepca.report import CSV_HEADER, VERIFY_HEADER, parse_sweep_csv, render_risk_curves

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
EXAMPLE_SWEEP = os.path.join(REPO_ROOT, "configs", "example_sweep.json")
TIGHT_CERTIFY = os.path.join(REPO_ROOT, "configs", "tight_certify.json")

FIXTURE_INSTANCE = {
    "design": [[2.0, 1.0], [2.0, -1.0], [0.0, 0.0], [0.0, 0.0]],
    "beta": [1.0, 1.0],
    "noise_variance": 1.0,
}


def write_config(tmp_path, name="cfg.json", **overrides):
    payload = {"instance": FIXTURE_INSTANCE, "lambdas": {"values": [1.0]}}
    payload.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestSweep:
    def test_fixture_row_values(self, tmp_path):
        config = write_config(tmp_path)
        out = tmp_path / "out.csv"
        assert cli.main(["sweep", config, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        row = lines[1].split(",")
        assert float(row[0]) == 1.0
        assert float(row[3]) == pytest.approx(7 / 12, rel=1e-12)
        assert float(row[6]) == pytest.approx(0.75, rel=1e-12)
        assert row[9] == "true"

    def test_grid_zero_has_ratio_one(self, tmp_path):
        config = write_config(tmp_path, lambdas={"values": [0.0]})
        out = tmp_path / "out.csv"
        assert cli.main(["sweep", config, "--out", str(out)]) == 0
        row = out.read_text().splitlines()[1].split(",")
        assert float(row[7]) == 1.0

    def test_round_trippable_values(self, tmp_path):
        config = write_config(tmp_path, lambdas={"values": [0.0, 0.3, 1.0, 7.5]})
        out = tmp_path / "out.csv"
        assert cli.main(["sweep", config, "--out", str(out)]) == 0
        rows = parse_sweep_csv(out.read_text())
        assert rows[2].ridge_risk == pytest.approx(7 / 12, rel=1e-15)

    def test_malformed_config_exits_2_without_output(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        out = tmp_path / "never.csv"
        assert cli.main(["sweep", str(bad), "--out", str(out)]) == 2
        assert not out.exists()

    def test_invalid_grid_exits_2(self, tmp_path):
        config = write_config(tmp_path, lambdas={"values": [1.0, 0.5]})
        assert cli.main(["sweep", config, "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_config_exits_2(self, tmp_path):
        assert cli.main(["sweep", str(tmp_path / "nope.json")]) == 2

    def test_unwritable_output_exits_3(self, tmp_path):
        config = write_config(tmp_path)
        out = tmp_path / "no_such_dir" / "out.csv"
        assert cli.main(["sweep", config, "--out", str(out)]) == 3

    def test_synthesis_config(self, tmp_path):
        config = write_config(
            tmp_path,
            instance={
                "spectrum": {"kind": "flat", "p": 3, "scale": 2.0},
                "signal": {"kind": "uniform", "norm": 1.0},
                "n": 8,
                "noise_variance": 1.0,
                "seed": 3,
            },
            lambdas={"min": 0.1, "max": 10.0, "count": 5},
        )
        out = tmp_path / "out.csv"
        assert cli.main(["sweep", config, "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 6

    def test_both_instance_sources_rejected(self, tmp_path):
        mixed = dict(FIXTURE_INSTANCE)
        mixed["spectrum"] = {"kind": "flat", "p": 2}
        config = write_config(tmp_path, instance=mixed)
        assert cli.main(["sweep", config]) == 2


class TestVerify:
    def test_agrees_on_fixture(self, tmp_path):
        config = write_config(
            tmp_path,
            lambdas={"values": [0.0, 1.0, 4.0]},
            monte_carlo={"enabled": True, "trials": 20000, "seed": 42, "noise": "gaussian"},
        )
        out = tmp_path / "verify.csv"
        assert cli.main(["verify", config, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == VERIFY_HEADER
        assert all(line.endswith(",true") for line in lines[1:])

    def test_zero_noise_exact_agreement(self, tmp_path):
        instance = dict(FIXTURE_INSTANCE, noise_variance=0.0)
        config = write_config(
            tmp_path,
            instance=instance,
            monte_carlo={"enabled": True, "trials": 100, "seed": 1, "noise": "gaussian"},
        )
        out = tmp_path / "verify.csv"
        assert cli.main(["verify", config, "--out", str(out)]) == 0
        row = out.read_text().splitlines()[1].split(",")
        empirical, se = float(row[10]), float(row[11])
        analytic = float(row[3])
        assert se == 0.0
        assert empirical == pytest.approx(analytic, rel=1e-10)

    def test_requires_monte_carlo_block(self, tmp_path):
        config = write_config(tmp_path)
        assert cli.main(["verify", config]) == 2

    def test_disabled_monte_carlo_rejected(self, tmp_path):
        config = write_config(
            tmp_path,
            monte_carlo={"enabled": False, "trials": 100, "seed": 1, "noise": "gaussian"},
        )
        assert cli.main(["verify", config]) == 2

    def test_corrupted_oracle_fails_with_exit_1(self, tmp_path, monkeypatch):
        config = write_config(
            tmp_path,
            monte_carlo={"enabled": True, "trials": 5000, "seed": 8, "noise": "gaussian"},
        )
        real_sweep = cli.lambda_sweep

        def corrupted(rotated, lambdas):
            result = real_sweep(rotated, lambdas)
            rows = tuple(
                dataclasses.replace(row, ridge_risk=row.ridge_risk * 1.5) for row in result.rows
            )
            return dataclasses.replace(result, rows=rows)

        monkeypatch.setattr(cli, "lambda_sweep", corrupted)
        assert cli.main(["verify", config, "--out", str(tmp_path / "v.csv")]) == 1


class TestCertify:
    def test_tight_fixture_reports_four(self, tmp_path, capsys):
        assert cli.main(["certify", TIGHT_CERTIFY]) == 0
        text = capsys.readouterr().out
        assert "worst overall ratio: 4" in text
        assert "bound holds: yes" in text

    def test_lam_zero_reports_one(self, tmp_path, capsys):
        config = write_config(tmp_path, lambdas={"values": [0.0]})
        assert cli.main(["certify", config]) == 0
        assert "worst overall ratio: 1" in capsys.readouterr().out

    def test_battery_passes(self, capsys):
        assert cli.main(["certify", "--battery"]) == 0
        out = capsys.readouterr().out
        assert "bound holds: yes" in out

    def test_needs_config_or_battery(self):
        assert cli.main(["certify"]) == 2

    def test_report_to_file(self, tmp_path):
        out = tmp_path / "report.txt"
        assert cli.main(["certify", TIGHT_CERTIFY, "--out", str(out)]) == 0
        assert "worst per-term ratio" in out.read_text()

    def test_plot_renders_worst_case(self, tmp_path):
        svg = tmp_path / "worst.svg"
        out = tmp_path / "report.txt"
        args = ["certify", TIGHT_CERTIFY, "--out", str(out), "--plot", str(svg)]
        assert cli.main(args) == 0
        assert svg.read_bytes().startswith(b"<?xml")


class TestDeterminism:
    def test_sweep_bytes_identical_across_processes(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            proc = subprocess.run(
                [sys.executable, "-m", "ridgepca.cli", "sweep", EXAMPLE_SWEEP, "--out", str(out)],
                capture_output=True,
                cwd=tmp_path,
            )
            assert proc.returncode == 0, proc.stderr.decode()
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_verify_bytes_identical_in_process(self, tmp_path):
        config = write_config(
            tmp_path,
            monte_carlo={"enabled": True, "trials": 3000, "seed": 4, "noise": "rademacher"},
        )
        blobs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            assert cli.main(["verify", config, "--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_plot_is_pure_function_of_csv(self, tmp_path):
        config = write_config(tmp_path, lambdas={"values": [0.0, 0.5, 1.0, 2.0]})
        csv_out = tmp_path / "out.csv"
        svg_direct = tmp_path / "direct.svg"
        assert cli.main(["sweep", config, "--out", str(csv_out), "--plot", str(svg_direct)]) == 0
        rows = parse_sweep_csv(csv_out.read_text())
        svg_again = tmp_path / "again.svg"
        render_risk_curves(rows, str(svg_again))
        assert svg_direct.read_bytes() == svg_again.read_bytes()

    def test_seed_override_changes_monte_carlo(self, tmp_path):
        config = write_config(
            tmp_path,
            monte_carlo={"enabled": True, "trials": 2000, "seed": 4, "noise": "gaussian"},
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["verify", config, "--out", str(a)]) == 0
        assert cli.main(["verify", config, "--out", str(b), "--seed", "99"]) == 0
        assert a.read_bytes() != b.read_bytes()
