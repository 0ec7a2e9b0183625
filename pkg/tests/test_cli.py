import json
import math

import pytest

from d2dcache.cli import CSV_COLUMNS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SIM_ARGS = (
    "simulate", "--n", "60", "--m", "8", "--gamma-r", "1.5", "--gamma-c", "1.5",
    "--r", "0.25", "--trials", "3", "--seed", "1",
)


class TestSimulate:
    def test_smoke_contract(self, capsys):
        code, out, _ = run_cli(capsys, *SIM_ARGS)
        assert code == 0
        payload = json.loads(out)
        assert payload["seed"] == 1
        assert payload["metrics"]["L_greedy"]["mean"] is not None
        assert payload["metrics"]["L_greedy"]["se"] is not None

    def test_missing_required_flag(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--n", "60", "--gamma-r", "1.5")
        assert code == 2

    def test_auto_r_resolves_via_prediction(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "simulate", "--n", "400", "--m", "8", "--gamma-r", "1.5", "--gamma-c", "1.5",
            "--r", "auto", "--r-constant", "1.5", "--trials", "1", "--seed", "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["r"] == pytest.approx(1.5 * math.sqrt(1 / 400))

    def test_bad_config_exit_2_names_field(self, capsys):
        code, _, err = run_cli(
            capsys,
            "simulate", "--n", "1", "--gamma-r", "1.5", "--gamma-c", "1.5",
            "--r", "0.2", "--trials", "1", "--seed", "1",
        )
        assert code == 2
        assert "n " in err

    def test_json_out_written(self, capsys, tmp_path):
        out_file = tmp_path / "result.json"
        code, out, _ = run_cli(capsys, *SIM_ARGS, "--json-out", str(out_file))
        assert code == 0
        assert json.loads(out_file.read_text()) == json.loads(out)


def _descriptor(tmp_path, values, output="rows.csv", axes_param="n"):
    descriptor = {
        "name": "smoke",
        "output": str(tmp_path / output),
        "base": {
            "gamma_r": 1.5,
            "policy": "zipf",
            "gamma_c": 1.5,
            "m": 8,
            "r": 0.25,
            "trials": 2,
        },
        "axes": [{"param": axes_param, "values": values}],
    }
    path = tmp_path / "descriptor.json"
    path.write_text(json.dumps(descriptor))
    return path, tmp_path / output


class TestSweep:
    def test_row_count_matches_axis(self, capsys, tmp_path):
        desc, out_csv = _descriptor(tmp_path, [40, 50, 60])
        code, out, _ = run_cli(capsys, "sweep", str(desc), "--seed", "5")
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 4
        assert out_csv.with_suffix(".json").exists()

    def test_resume_byte_identical(self, capsys, tmp_path):
        desc, out_csv = _descriptor(tmp_path, [40, 50, 60])
        code, _, _ = run_cli(capsys, "sweep", str(desc), "--seed", "5")
        assert code == 0
        full = out_csv.read_bytes()
        # simulate an interrupted run: keep header and first row only
        lines = out_csv.read_text().splitlines()
        out_csv.write_text("\n".join(lines[:2]) + "\n")
        code, out, _ = run_cli(capsys, "sweep", str(desc), "--seed", "5", "--resume")
        assert code == 0
        assert json.loads(out)["reused"] == 1
        assert out_csv.read_bytes() == full

    def test_duplicate_axis_values_exit_2(self, capsys, tmp_path):
        desc, _ = _descriptor(tmp_path, [40, 40])
        code, _, err = run_cli(capsys, "sweep", str(desc), "--seed", "5")
        assert code == 2
        assert "duplicate" in err

    def test_malformed_json_exit_2(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "sweep", str(path), "--seed", "5")
        assert code == 2

    def test_unknown_base_field_named(self, capsys, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps({"output": str(tmp_path / "o.csv"), "base": {"bogus": 1}, "axes": []})
        )
        code, _, err = run_cli(capsys, "sweep", str(path), "--seed", "5")
        assert code == 2
        assert "bogus" in err

    def test_seed_required(self, capsys, tmp_path):
        desc, _ = _descriptor(tmp_path, [40])
        code, _, _ = run_cli(capsys, "sweep", str(desc))
        assert code == 2


class TestFit:
    def test_perfect_power_law(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("n,L_greedy_mean\n" + "".join(f"{x},{3 * x * x}\n" for x in (1, 2, 3, 4)))
        code, out, _ = run_cli(capsys, "fit", str(path), "--x", "n", "--y", "L_greedy_mean")
        assert code == 0
        payload = json.loads(out)
        assert payload["slope"] == pytest.approx(2.0, abs=1e-12)

    def test_round_trip_from_sweep(self, capsys, tmp_path):
        desc, out_csv = _descriptor(tmp_path, [40, 60, 90])
        run_cli(capsys, "sweep", str(desc), "--seed", "5")
        code, out, _ = run_cli(capsys, "fit", str(out_csv), "--x", "n", "--y", "potential_mean")
        assert code == 0
        payload = json.loads(out)
        assert math.isfinite(payload["slope"]) and payload["rows"] == 3

    def test_too_few_rows_exit_2(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("n,L_greedy_mean\n1,1\n2,2\n")
        code, _, _ = run_cli(capsys, "fit", str(path))
        assert code == 2

    def test_missing_column_named(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("n,other\n1,1\n2,2\n3,3\n")
        code, _, err = run_cli(capsys, "fit", str(path), "--y", "L_greedy_mean")
        assert code == 2
        assert "L_greedy_mean" in err


class TestSolveGammaC:
    def test_regular_case(self, capsys):
        code, out, _ = run_cli(capsys, "solve-gamma-c", "--gamma-r", "0.5", "--epsilon", "0.05")
        assert code == 0
        payload = json.loads(out)
        # bisection oracle cross-check of the defining equation
        gc = payload["gamma_c"]
        assert 0.5 * gc / (0.5 + gc) == pytest.approx(payload["eta1"], abs=1e-12)

    def test_epsilon_out_of_regime_exit_3(self, capsys):
        code, _, err = run_cli(capsys, "solve-gamma-c", "--gamma-r", "0.5", "--epsilon", "0.2")
        assert code == 3
        assert "warning" in err

    def test_bad_gamma_r_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve-gamma-c", "--gamma-r", "1.2", "--epsilon", "0.05")
        assert code == 2


class TestPredict:
    def test_high_reuse_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "predict", "--gamma-r", "1.5", "--n", "10000", "--m", "20", "--constant", "1.5"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["r_opt"] == pytest.approx(0.015)
        assert payload["predicted_el"] == 10000.0

    def test_clamp_case(self, capsys):
        code, out, _ = run_cli(
            capsys, "predict", "--gamma-r", "1.5", "--n", "2", "--m", "20", "--constant", "9"
        )
        assert code == 0
        assert json.loads(out)["r_opt"] == pytest.approx(math.sqrt(2))

    def test_critical_small_m_flag_exit_3(self, capsys):
        code, out, _ = run_cli(
            capsys, "predict", "--gamma-r", "1.0", "--n", "1000", "--m", "10"
        )
        assert code == 3
        assert json.loads(out)["regime"] == "critical"
