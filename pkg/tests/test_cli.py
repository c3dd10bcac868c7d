import json

import pytest

from src.cli import ENV_TEMPLATE, run
from src.sim.engine import BOUNDS_COLUMNS
from src.sim.strata import save_spec
from src.tables import sweep_templates


def run_json(capsys, *argv):
    status = run([*argv, "--format", "json"])
    captured = capsys.readouterr()
    return status, json.loads(captured.out) if captured.out else None


class TestAnalyticCommands:
    def test_sample_size_example(self, capsys):
        status, document = run_json(
            capsys,
            "n",
            "--kappa",
            "0.10",
            "--pi",
            "0.63",
            "--pz",
            "0.67",
            "--round",
            "nearest",
        )
        assert status == 0
        assert document["n_high"] == 9861
        assert document["n_star"] == 8966
        assert document["mode"] == "general"
        assert document["round"] == "nearest"

    def test_sample_size_rounds_up_by_default(self, capsys):
        status, document = run_json(
            capsys, "n", "--kappa", "0.10", "--pi", "0.63", "--pz", "0.67"
        )
        assert status == 0
        assert document["n_star"] == 8967

    def test_zero_effect_power(self, capsys):
        status, document = run_json(
            capsys,
            "power",
            "--kappa",
            "0",
            "--pi",
            "0.5",
            "--n",
            "1500",
            "--ordered",
        )
        assert status == 0
        for key in ("lower", "upper", "ordered_lower"):
            assert document[key] == pytest.approx(0.05, abs=1e-12)

    def test_covariates_are_echoed(self, capsys):
        status, document = run_json(
            capsys,
            "power",
            "--kappa",
            "0.2",
            "--pi",
            "0.5",
            "--n",
            "1500",
            "--r2yw",
            "0.3",
        )
        assert status == 0
        assert document["r2_yw"] == 0.3
        assert document["r2_dw"] == 0.0

    def test_json_is_stable(self, capsys):
        argv = ["mdes", "--pi", "0.4", "--n", "5000", "--format", "json"]
        assert run(argv) == 0
        first = capsys.readouterr().out
        assert run(argv) == 0
        assert capsys.readouterr().out == first
        assert list(json.loads(first)) == sorted(json.loads(first))

    def test_unattainable_mdes(self, capsys):
        status = run(["mdes", "--pi", "0.3", "--n", "10", "--format", "json"])
        captured = capsys.readouterr()
        assert status == 1
        document = json.loads(captured.out)
        assert document["status"] == "unattainable"
        assert document["kappa_high"] == "inf"
        assert "Unattainable" in captured.err

    def test_text_format(self, capsys):
        status = run(["power", "--kappa", "0.2", "--pi", "0.5", "--n", "1500"])
        out = capsys.readouterr().out
        assert status == 0
        assert any(line.startswith("lower") for line in out.splitlines())

    def test_curves_default_to_csv(self, capsys):
        status = run(
            [
                "curves",
                "--kind",
                "power-by-kappa",
                "--pi",
                "0.5",
                "--fixed",
                "1500",
                "--grid",
                "0:0.2:0.1",
            ]
        )
        lines = capsys.readouterr().out.splitlines()
        assert status == 0
        assert lines[0].split(",")[0] == "kappa"
        assert len(lines) == 4

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out" / "power.json"
        status = run(
            [
                "power",
                "--kappa",
                "0.2",
                "--pi",
                "0.5",
                "--n",
                "1500",
                "--format",
                "json",
                "--output",
                str(path),
            ]
        )
        assert status == 0
        assert capsys.readouterr().out == ""
        assert "upper" in json.loads(path.read_text(encoding="utf-8"))


class TestArgumentErrors:
    @pytest.mark.parametrize(
        "argv, flag",
        [
            (["power", "--kappa", "0.2", "--pi", "1.5", "--n", "10"], "--pi"),
            (["power", "--kappa", "0.2", "--pi", "0.5", "--n", "0"], "--n"),
            (["n", "--kappa", "0", "--pi", "0.5"], "--kappa"),
            (["mdes", "--pi", "0.5", "--n", "100", "--beta", "0.6"], "--beta"),
            (["n", "--kappa", "0.1", "--pi", "0.5", "--pz", "1"], "--pz"),
            (
                [
                    "n",
                    "--kappa",
                    "0.1",
                    "--pi",
                    "0.5",
                    "--pz",
                    "0.3",
                    "--mode",
                    "equal",
                ],
                "--mode",
            ),
        ],
    )
    def test_precondition_violations_exit_2(self, capsys, argv, flag):
        assert run(argv) == 2
        assert flag in capsys.readouterr().err

    def test_missing_subcommand(self, capsys):
        assert run([]) == 2

    def test_missing_required_flag(self, capsys):
        assert run(["power", "--pi", "0.5", "--n", "100"]) == 2

    def test_bad_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("LATE_POWER_ALPHA", "2")
        assert run(["power", "--kappa", "0.2", "--pi", "0.5", "--n", "9"]) == 2
        assert "LATE_POWER_ALPHA" in capsys.readouterr().err


class TestSimulationCommands:
    @pytest.fixture
    def spec_file(self, b1_spec, tmp_path):
        return str(
            save_spec(b1_spec, tmp_path / "b1.json", {"n": 300, "reps": 20})
        )

    def test_simulate_is_reproducible(self, capsys, spec_file):
        argv = ["simulate", "--spec", spec_file, "--seed", "3"]
        status, first = run_json(capsys, *argv)
        assert status == 0
        assert first["reps"] == 20
        assert first["n"] == 300
        assert first["seed"] == 3
        assert first["pi"] == 0.2
        _, second = run_json(capsys, *argv)
        assert first == second

    def test_flags_override_spec_config(self, capsys, spec_file):
        status, document = run_json(
            capsys, "simulate", "--spec", spec_file, "--n", "400"
        )
        assert status == 0
        assert document["n"] == 400

    def test_simulate_needs_a_sample_size(self, capsys, b1_spec, tmp_path):
        path = save_spec(b1_spec, tmp_path / "bare.json")
        assert run(["simulate", "--spec", str(path)]) == 2
        assert "sample size" in capsys.readouterr().err

    def test_missing_spec_file(self, capsys, tmp_path):
        missing = str(tmp_path / "nope.json")
        assert run(["simulate", "--spec", missing, "--n", "100"]) == 2

    def test_validate_csv_columns(self, capsys, tmp_path):
        path = save_spec(
            sweep_templates()[0],
            tmp_path / "template.json",
            {"n": 300, "reps": 10},
        )
        status = run(
            ["validate", "--spec", str(path), "--kappa-grid", "0.1:0.2:0.1"]
        )
        lines = capsys.readouterr().out.splitlines()
        assert status == 0
        assert lines[0] == ",".join(BOUNDS_COLUMNS)
        assert len(lines) == 3

    def test_validate_rejects_zero_kappa(self, capsys, tmp_path):
        path = save_spec(
            sweep_templates()[0], tmp_path / "template.json", {"n": 300}
        )
        status = run(
            ["validate", "--spec", str(path), "--kappa-grid", "0:0.2:0.1"]
        )
        assert status == 2

    def test_unreachable_kappa(self, capsys, b1_spec, tmp_path):
        path = save_spec(b1_spec, tmp_path / "b1.json", {"n": 300, "reps": 5})
        status = run(
            ["validate", "--spec", str(path), "--kappa-grid", "6:6:1"]
        )
        assert status == 1
        assert "kappa_target" in capsys.readouterr().err


class TestTablesAndDiagnose:
    def test_table1_csv(self, capsys):
        assert run(["tables", "--which", "1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "kappa,tau,n_conservative,n_ordered"
        assert lines[2] == "0.1,1675.88,9861,8966"
        assert len(lines) == 11

    def test_diagnose(self, capsys, write_json):
        path = write_json(
            "c3.json",
            {
                "cells": [
                    {"z": 0, "d": 0, "count": 69, "mean": -0.527},
                    {"z": 0, "d": 1, "count": 90, "mean": 0.048},
                    {"z": 1, "d": 1, "count": 244, "mean": 0.055},
                ]
            },
        )
        status, document = run_json(capsys, "diagnose", "--table", path)
        assert status == 0
        assert document["ybar_c"] == pytest.approx(-0.17, abs=0.005)
        assert document["ybar_nt"] is None
        assert document["ordered_means_satisfied"] is True

    def test_infeasible_table(self, capsys, write_json):
        path = write_json(
            "bad.json",
            {
                "cells": [
                    {"z": 0, "d": 0, "count": 10, "mean": 0.0},
                    {"z": 0, "d": 1, "count": 90, "mean": 1.0},
                    {"z": 1, "d": 0, "count": 90, "mean": 0.0},
                    {"z": 1, "d": 1, "count": 10, "mean": 1.0},
                ]
            },
        )
        status, document = run_json(capsys, "diagnose", "--table", path)
        assert status == 1
        assert document["status"] == "infeasible"


class TestInit:
    def test_init_writes_template(self, capsys, isolated_env):
        assert run(["init"]) == 0
        env_path = isolated_env / ".late-power" / ".env"
        assert env_path.read_text(encoding="utf-8") == ENV_TEMPLATE

    def test_init_keeps_existing_file(self, capsys, isolated_env, monkeypatch):
        env_path = isolated_env / ".late-power" / ".env"
        env_path.parent.mkdir()
        env_path.write_text("LATE_POWER_REPS=7\n", encoding="utf-8")
        monkeypatch.setattr("builtins.input", lambda prompt: "n")
        assert run(["init"]) == 0
        assert env_path.read_text(encoding="utf-8") == "LATE_POWER_REPS=7\n"

    def test_config_without_file(self, capsys):
        assert run(["config"]) == 1
