from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from oracles import theta1_straight
from quniq.cli import fmt_float, main, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--no-timing")
    assert code == 0, err
    return json.loads(out)


# -- weight-report ------------------------------------------------------------------


def test_weight_report_band_moments(capsys):
    rep = run_json(capsys, "weight-report", "--weight", "band:2", "--nmax", "4")
    assert rep["log_M"] == pytest.approx([k * math.log(2) for k in range(5)], abs=1e-14)
    assert rep["pls_classification"] == "PLS_HOLDS"
    assert rep["log_integral"]["CAUCHY"] == "inf"


def test_weight_report_endpoint_holds(capsys):
    rep = run_json(capsys, "weight-report", "--weight", "endpoint:delta=1,c=1", "--nmax", "50")
    assert rep["pls_classification"] == "PLS_HOLDS"


def test_weight_report_malformed_family(capsys):
    code, out, err = run(capsys, "weight-report", "--weight", "bogus:1")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "ConfigError"


def test_weight_report_needs_weight(capsys):
    code, out, _ = run(capsys, "weight-report")
    assert code == 2 and out == ""


def test_weight_report_fails_classification(capsys):
    rep = run_json(capsys, "weight-report", "--weight", "powerexp:c=1,alpha=0.5")
    assert rep["pls_classification"] == "PLS_FAILS"


# -- pls-constant -----------------------------------------------------------------------


def test_pls_constant_band_matches_module(capsys):
    rep = run_json(capsys, "pls-constant", "--weight", "band:2.718281828459045",
                   "--A", "2.718281828459045", "--gamma", "0.5")
    expected = 0.5 * math.log(8) + theta1_straight([2.0 * n for n in range(150)], 3.0, 0.25)
    assert rep["log_C"]["log_value"] == pytest.approx(expected, abs=1e-9)
    assert rep["bang_degrees"] == [23]
    assert rep["A"] == pytest.approx(math.e)


def test_pls_constant_gamma_halved_nondecreasing(capsys):
    base = ["pls-constant", "--weight", "endpoint:delta=1,c=20000", "--nmax", "2000"]
    a = run_json(capsys, *base, "--gamma", "0.5")["log_C"]["log_value"]
    b = run_json(capsys, *base, "--gamma", "0.25")["log_C"]["log_value"]
    assert b >= a


def test_pls_constant_small_nmax_exit_4(capsys):
    code, out, err = run(capsys, "pls-constant", "--weight", "band:2.718281828459045", "--nmax", "20")
    assert code == 4 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "EXCEEDS_NMAX" and payload["level"] == 1


def test_pls_constant_failing_weight_exit_3(capsys):
    code, _, err = run(capsys, "pls-constant", "--weight", "powerexp:c=1,alpha=0.5")
    assert code == 3 and json.loads(err)["error"] == "INVALID_WEIGHT"


# -- cover and sparsity -------------------------------------------------------------------


def test_cover_quarter_weight_norm(capsys, tmp_path):
    f = tmp_path / "q.txt"
    f.write_text("# one interval\n3 4\n")
    rep = run_json(capsys, "cover", "--weight", "powerexp:c=0.25,alpha=1", "--intervals", str(f))
    assert rep["norm"] == 0.125
    assert rep["card_bound_ok"] is True
    assert rep["sparsity"]["status"] == "LOWER_BOUND"


def test_cover_empty_file(capsys, tmp_path):
    f = tmp_path / "e.txt"
    f.write_text("")
    rep = run_json(capsys, "cover", "--weight", "powerexp:c=0.25,alpha=1", "--intervals", str(f))
    assert rep["norm"] == 0


def test_cover_cantor_card_bound(capsys):
    rep = run_json(capsys, "cover", "--weight", "endpoint:delta=1,c=0.25", "--cantor", "3:0,2:5:243")
    assert rep["card_bound_ok"] is True
    assert rep["regularized_card"] <= 7 * rep["input_card"]


def test_cover_parse_failure(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("3 four\n")
    code, out, _ = run(capsys, "cover", "--weight", "powerexp:c=0.25,alpha=1", "--intervals", str(f))
    assert code == 2 and out == ""


def test_cover_missing_file(capsys, tmp_path):
    code, out, _ = run(capsys, "cover", "--weight", "powerexp:c=0.25,alpha=1",
                       "--intervals", str(tmp_path / "absent.txt"))
    assert code == 2 and out == ""


def test_sparsity_csv(capsys, tmp_path):
    f = tmp_path / "q.txt"
    f.write_text("3 4\n")
    code, out, _ = run(capsys, "sparsity", "--weight", "powerexp:c=0.25,alpha=1",
                       "--intervals", str(f), "--format", "CSV", "--no-timing")
    assert code == 0
    rows = dict(csv.reader(io.StringIO(out)))
    assert rows["status"] == "LOWER_BOUND" and float(rows["value"]) >= 0.125


# -- fup-experiment ----------------------------------------------------------------------


def test_fup_rows_positive(capsys):
    code, out, _ = run(capsys, "fup-experiment", "--kmin", "3", "--kmax", "6", "--format", "CSV")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    assert [int(r["N"]) for r in rows] == [27, 81, 243, 729]
    assert all(float(r["sigma_min"]) > 0 for r in rows)
    assert list(rows[0]) == ["N", "Q", "E", "sigma_min", "recovery_constant", "method", "seed",
                             "wall_time_ms"]


def test_fup_smoke_row(capsys):
    code, out, _ = run(capsys, "fup-experiment", "--kmax", "3", "--smoke", "--format", "CSV",
                       "--no-timing")
    rows = list(csv.DictReader(io.StringIO(out)))
    smoke = rows[-1]
    assert int(smoke["Q"]) == 1
    expected = math.sqrt(int(smoke["E"]) / int(smoke["N"]))
    assert float(smoke["sigma_min"]) == pytest.approx(expected, abs=1e-12)
    assert smoke["wall_time_ms"] == ""


def test_fup_deterministic_csv(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["fup-experiment", "--kmax", "5", "--rule", "RANDOM", "--seed", "7",
                     "--method", "ITERATIVE", "--no-timing", "--format", "CSV", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_fup_require_positive_exit_5(capsys):
    code, out, err = run(capsys, "fup-experiment", "--kmax", "3", "--gamma", "0.1",
                         "--require-positive", "--format", "CSV")
    assert code == 5
    assert json.loads(err)["error"] == "SINGULAR"
    assert out.count("\n") == 2


def test_fup_json_schema(capsys):
    rep = run_json(capsys, "fup-experiment", "--kmax", "3", "--format", "JSON_REPORT")
    assert rep["rows"][0]["Q"] == 8 and "wall_time_ms" not in rep["rows"][0]


# -- paley-wiener -----------------------------------------------------------------------


def test_paley_wiener_report(capsys):
    rep = run_json(capsys, "paley-wiener", "--weight", "powerexp:c=1,alpha=0.5", "--N", "16384",
                   "--xi-max", "1000")
    assert rep["n0"] >= 10 and rep["support_halfwidth"] < 0.3
    assert rep["energy_outside_3eps"] < 1e-6
    assert rep["recovery_ratio_outside_3eps"] < 1e-3
    assert rep["weighted_energy"] == pytest.approx(rep["weighted_energy_coarse"], rel=0.01)


def test_paley_wiener_fat_tail_exit_2(capsys):
    code, _, err = run(capsys, "paley-wiener", "--weight", "band:2", "--nmax", "50")
    assert code == 2 and json.loads(err)["error"] == "TAIL_TOO_FAT"


# -- config handling -------------------------------------------------------------------------


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nweight = band:2\nnmax = 3\nno_timing = true\n")
    assert read_config_file(str(cfg))["nmax"] == "3"
    rep = json.loads(run(capsys, "weight-report", "--config", str(cfg))[1])
    assert len(rep["log_M"]) == 4 and "wall_time_ms" not in rep
    rep = json.loads(run(capsys, "weight-report", "--config", str(cfg), "--nmax", "5")[1])
    assert len(rep["log_M"]) == 6


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    code, out, _ = run(capsys, "weight-report", "--config", str(cfg))
    assert code == 2 and out == ""


def test_config_domain_check(capsys):
    code, _, _ = run(capsys, "pls-constant", "--weight", "band:3", "--gamma", "1.5")
    assert code == 2


def test_timing_present_by_default(capsys):
    code, out, _ = run(capsys, "weight-report", "--weight", "band:2", "--nmax", "3")
    assert code == 0 and json.loads(out)["wall_time_ms"] >= 0


def test_fmt_float():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(math.inf) == "inf" and fmt_float(math.nan) == "nan"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quniq.cli", "weight-report", "--weight", "band:2",
                           "--nmax", "2", "--no-timing"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["log_M"][2] == pytest.approx(2 * math.log(2))
