import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import FIXTURES
from etpa_toolkit.cli import main
from etpa_toolkit.quantities import CONSTANTS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def quantity_map(text):
    return {r["quantity"]: (float(r["value"]), r["unit"]) for r in rows_of(text)}


def test_convert(capsys):
    code, out, _ = run(capsys, "convert", "1", "eV", "cm-1")
    assert code == 0 and float(out.split()[0]) == pytest.approx(8065.54, abs=0.01)
    code, out, _ = run(capsys, "convert", "400", "nm", "cm-1")
    assert code == 0 and float(out.split()[0]) == pytest.approx(25000)
    code, out, err = run(capsys, "convert", "1", "eV", "s")
    assert code == 2 and out == "" and "energy" in err and "time" in err


def test_rates_cw(capsys):
    code, out, _ = run(capsys, "--config", str(CONFIGS / "tpa_cw.json"), "--output", "csv",
                       "rates")
    assert code == 0
    q = quantity_map(out)
    assert q["entangled_cross_section"][1] == "cm2"
    assert q["entangled_cross_section"][0] == pytest.approx(1e-28, rel=1e-12)
    assert q["critical_flux"][0] == pytest.approx(1e20, rel=1e-12)
    assert q["flux_average"][0] == pytest.approx(2.56e28, rel=0.01)
    assert q["classical_rate_average"][0] == pytest.approx(6.6, rel=0.01)


def test_rates_json_matches_csv(capsys):
    cfg = str(CONFIGS / "tpa_cw.json")
    _, out_csv, _ = run(capsys, "rates", "--config", cfg, "--output", "csv")
    _, out_json, _ = run(capsys, "rates", "--config", cfg, "--output", "json")
    data = json.loads(out_json)
    for name, (value, unit) in quantity_map(out_csv).items():
        if name == "peak_to_average":
            assert data[name]["value"] == value
            continue
        assert data[name] == {"value": value, "unit": unit}


def test_rates_table_values_match_json(capsys):
    cfg = str(CONFIGS / "tpa_cw.json")
    _, table, _ = run(capsys, "rates", "--config", cfg)
    _, out_json, _ = run(capsys, "rates", "--config", cfg, "--output", "json")
    data = json.loads(out_json)
    for line in table.splitlines()[1:]:
        if line.startswith("note:"):
            continue
        name, value, *_ = line.split()
        ref = data[name]["value"]
        assert float(value) == pytest.approx(ref, rel=1e-5)


def test_rates_pulsed_and_mixed_unit_check(capsys):
    code, out, _ = run(capsys, "rates", "--config", str(CONFIGS / "tpa_pulsed.json"),
                       "--paper-check", "--output", "csv")
    assert code == 0
    q = quantity_map(out)
    assert q["peak_to_average"][0] == pytest.approx(1e9, rel=1e-12)
    assert q["mixed_unit_discrepancy_factor"][0] == pytest.approx(1e8, rel=1e-10)
    assert q["classical_rate_average"][0] == pytest.approx(6.6e9, rel=0.01)
    code, out, _ = run(capsys, "rates", "--config", str(CONFIGS / "tpa_cw.json"), "--paper-check")
    assert "note:" in out and "m^-2 s^-1" in out


def test_set_override_and_config_errors(capsys):
    cfg = str(CONFIGS / "tpa_cw.json")
    code, out, _ = run(capsys, "rates", "--config", cfg, "--output", "csv",
                       "--set", 'laser.spot_diameter="20 um"')
    assert code == 0
    assert quantity_map(out)["flux_average"][0] == pytest.approx(2.56e28 / 4, rel=0.01)
    code, _, err = run(capsys, "rates", "--config", cfg, "--set", "laser.power=1")
    assert code == 2 and "laser.power" in err and "bare number" in err
    code, _, err = run(capsys, "rates", "--config", "/nonexistent.json")
    assert code == 2
    code, _, err = run(capsys, "rates", "--config", cfg, "--set", 'species.sigma_c="1 cm2"')
    assert code == 2 and "species.sigma_c" in err


def test_source(capsys):
    code, out, _ = run(capsys, "source", "--config", str(CONFIGS / "spdc_source.json"),
                       "--output", "json")
    assert code == 0
    data = json.loads(out)
    assert data["pair_rate"]["value"] == pytest.approx(1e7, rel=0.01)
    assert data["degenerate_wavelength"] == {"value": 810.0, "unit": "nm"}
    assert data["polarization"] == "parallel"
    df = CONSTANTS.c * 20e-9 / 810e-9**2
    assert data["entanglement_time"]["value"] == pytest.approx(1 / df, rel=1e-12)


def test_abundance_scan(capsys):
    code, out, _ = run(capsys, "abundance", "--config", str(CONFIGS / "ar_ii_sample.json"),
                       "--Te-range", "1:4:31", "--output", "csv")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 31
    for r in rows:
        fr = [float(v) for k, v in r.items() if k.startswith("f")]
        assert abs(sum(fr) - 1) <= 1e-12
    code, _, err = run(capsys, "abundance", "--config", str(CONFIGS / "ar_ii_sample.json"),
                       "--Te-range", "0.1:4:3")
    assert code == 2 and "Te=0.1" in err


def test_abundance_single_matches_library(capsys):
    from etpa_toolkit import sample_path
    from etpa_toolkit.populations import RateCoefficientTable, fractional_abundance
    code, out, _ = run(capsys, "abundance", "--config", str(CONFIGS / "ar_ii_sample.json"),
                       "--output", "json")
    (row,) = json.loads(out)
    table = RateCoefficientTable.from_csv(sample_path("ar_rate_coefficients.csv"))
    f = fractional_abundance(table, 3.0).fractions
    assert [row[f"f{z}"] for z in range(len(f))] == [float(x) for x in f]


def test_populations_two_level(capsys):
    code, out, _ = run(capsys, "populations", "--config", str(FIXTURES / "two_level.json"),
                       "--output", "json")
    assert code == 0
    data = json.loads(out)
    e = next(lv for lv in data["levels"] if lv["level_id"] == "e")
    de = 24196.5 / CONSTANTS.eV_to_cm1
    q_up = 8.629e-6 / math.sqrt(3) / 2 * math.exp(-de / 3)
    q_dn = 8.629e-6 / math.sqrt(3) / 4
    assert e["population"] == pytest.approx(1e12 * q_up / (1e12 * q_dn + 1e7), rel=1e-10)


def test_populations_contributions_sum(capsys):
    code, out, _ = run(capsys, "populations", "--config", str(CONFIGS / "ar_ii_sample.json"),
                       "--output", "csv")
    assert code == 0
    rows = rows_of(out)
    marked = {r["level_id"] for r in rows if r["metastable"] == "*"}
    assert marked
    for r in rows:
        if r["role"] == "excited":
            parts = sum(float(v) for k, v in r.items() if k.startswith("from_"))
            assert parts == pytest.approx(float(r["population"]), rel=1e-10)


def test_populations_no_decay_is_boltzmann(capsys):
    code, out, _ = run(capsys, "populations", "--config", str(FIXTURES / "no_decay.json"),
                       "--output", "json")
    assert code == 0
    for lv in json.loads(out)["levels"]:
        ref = math.exp(-lv["energy_cm1"] / CONSTANTS.eV_to_cm1 / 2.0)
        assert lv["population"] == pytest.approx(ref, rel=1e-10)


def test_populations_unreachable_exit_3(capsys):
    code, out, err = run(capsys, "populations", "--config", str(FIXTURES / "isolated.json"))
    assert code == 3 and out == "" and "x" in err


def test_find_three_level(capsys):
    code, out, _ = run(capsys, "find", "--config", str(FIXTURES / "three_level.json"),
                       "--output", "csv")
    assert code == 0
    (row,) = rows_of(out)
    assert (row["lower_id"], row["upper_id"]) == ("g", "e")
    assert float(row["pump_nm"]) == pytest.approx(384.6, abs=0.05)
    assert float(row["score"]) > 0


def test_find_narrow_window_is_empty(capsys):
    code, out, _ = run(capsys, "find", "--config", str(FIXTURES / "three_level.json"),
                       "--output", "csv", "--set", 'search.window=["350 nm", "380 nm"]')
    assert code == 0
    assert out.strip().count("\n") == 0 and out.startswith("lower_id,upper_id")


def test_find_explain(capsys, tmp_path):
    levels = tmp_path / "levels.csv"
    levels.write_text("id,configuration,term,J,energy_cm1\ng,s,2S,1/2,0\ni,p,2P*,1/2,13000\n"
                      "e,s2,4S,3/2,26000\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"files": {"levels": "levels.csv"}}))
    code, out, _ = run(capsys, "find", "--config", str(cfg), "--explain", "g", "e")
    assert code == 0 and "spin rule" in out
    code, out, _ = run(capsys, "find", "--config", str(cfg), "--explain", "g", "e",
                       "--output", "json")
    assert json.loads(out)["reasons"][0] == "spin rule"
    code, _, err = run(capsys, "find", "--config", str(cfg), "--explain", "g", "nope")
    assert code == 2


def test_meta_goes_to_stderr(capsys):
    code, out, err = run(capsys, "--meta", "convert", "1", "eV", "cm-1")
    assert code == 0 and "version" not in out
    assert json.loads(err.strip().splitlines()[-1])["command"] == "convert"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "etpa_toolkit.cli", "convert", "1", "eV", "cm-1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert float(proc.stdout.split()[0]) == pytest.approx(8065.54, abs=0.01)


def test_bad_level_file_exit_2(capsys, tmp_path):
    (tmp_path / "levels.csv").write_text("id,configuration,term,J,energy_cm1\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"files": {"levels": "levels.csv"}}))
    code, _, err = run(capsys, "find", "--config", str(cfg))
    assert code == 2 and "files.levels" in err
