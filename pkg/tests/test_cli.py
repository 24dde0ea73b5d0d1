import csv
import json
import math
import subprocess
import sys

import pytest

from symreeb import cli

R2SQ = (1 + math.sqrt(5)) / 2


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_critical_values_run(tmp_path):
    assert cli.main(["critical-values", "--system", "henon_heiles", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "results.csv")
    values = sorted({round(float(r["value"]), 12) for r in rows})
    assert values == [0.0, round(1 / 6, 12)]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["inputs"]["system"] == {"system": "henon_heiles"}
    assert manifest["backend"] in ("compiled", "python")
    assert set(manifest["results"]) == {"results.csv"}
    assert manifest["defaults"]["spectral_modes"] == 256


def test_index_run(tmp_path):
    argv = ["index", "--system", "ellipsoid", "--r2sq", repr(R2SQ), "--orbit", "P2", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    (row,) = read_rows(tmp_path / "results.csv")
    assert row["mu_cz_spectral"] == row["mu_cz_rotation"] == "5"
    assert row["mu_rs_spectral"] == row["mu_rs_crossing"] == "2.5"
    assert row["errors"] == ""


def test_index_iterates(tmp_path):
    argv = ["index", "--system", "ellipsoid", "--r2sq", repr(R2SQ), "--iterate", "3", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    assert [r["mu_cz_spectral"] for r in read_rows(tmp_path / "results.csv")] == ["3", "7", "9"]


def test_degenerate_index_is_a_numerical_failure(tmp_path, capsys):
    assert cli.main(["index", "--system", "hopf", "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err
    # the partial table records the failing method
    (row,) = read_rows(tmp_path / "results.csv")
    assert "DegeneracyError" in row["errors"]


@pytest.mark.parametrize("argv", [
    ["index", "--system", "nbody"],
    ["index"],
    ["critical-values", "--system", "pcr3bp", "--mu", "2.0"],
    ["section", "--system", "henon_heiles"],
])
def test_validation_errors(tmp_path, argv, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 2
    assert "validation error" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"task": "critical-values", "system": {"system": "pcr3bp", "mu": 0.3}}))
    out = tmp_path / "run"
    assert cli.main(["critical-values", "--config", str(cfg), "--mu", "0.5", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["inputs"]["system"]["mu"] == 0.5
    assert len({r["distinct_index"] for r in read_rows(out / "results.csv")}) == 3


def test_bad_config_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["critical-values", "--config", str(bad), "--out", str(tmp_path)]) == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"task": "index", "system": {"system": "hill"}}))
    assert cli.main(["critical-values", "--config", str(wrong), "--out", str(tmp_path)]) == 2
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"system": {"system": "hill"}, "colour": "blue"}))
    assert cli.main(["critical-values", "--config", str(extra), "--out", str(tmp_path)]) == 2


def test_underscore_aliases(tmp_path):
    assert cli.main(["critical_values", "--system", "hill", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["inputs"]["task"] == "critical-values"


def test_section_run(tmp_path):
    argv = ["section", "--system", "hopf", "--theta", repr(math.pi / 2), "--grid", "4", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    rows = read_rows(tmp_path / "results.csv")
    assert len(rows) == 16
    assert max(abs(float(r["tau"]) - math.pi) for r in rows) < 1e-8
    assert (tmp_path / "plot.svg").read_text().startswith("<svg")


@pytest.mark.slow
def test_orbit_search_run(tmp_path):
    argv = ["orbit-search", "--system", "hill", "--c", "-3", "--start", "rho1", "--end", "rho2",
            "--seeds", "4", "--crossings", "1", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    rows = read_rows(tmp_path / "results.csv")
    assert rows and all(r["sym_type"] == "doubly_symmetric" for r in rows)
    lines = (tmp_path / "results.jsonl").read_text().splitlines()
    assert len(lines) == len(rows)


@pytest.mark.slow
def test_linking_and_predicate_runs(tmp_path):
    base = ["--system", "ellipsoid", "--r2sq", repr(R2SQ)]
    assert cli.main(["linking", *base, "--out", str(tmp_path / "lk")]) == 0
    rows = {(r["pair"], r["kind"]): r for r in read_rows(tmp_path / "lk" / "results.csv")}
    assert rows[("P1,P2", "linking")]["value"] == "1"
    assert rows[("P1", "self_linking")]["value"] == "-1"
    assert rows[("P2", "self_linking")]["value"] == "-1"
    assert cli.main(["predicate", *base, "--orbit", "P1", "--out", str(tmp_path / "pr")]) == 0
    rep = json.loads((tmp_path / "pr" / "results.jsonl").read_text())
    assert rep["mu_cz"] == 3 and rep["self_linking"] == -1 and rep["simply_covered"] is True


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "symreeb.cli", "critical-values", "--system", "hill",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "results.csv" in proc.stdout
