import csv
import io
import json
import os
import subprocess
import sys

import pytest

from shadowlab.cli import main, parse_complex


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "text, value",
    [("2", 2), ("-0.5i", -0.5j), ("1+2i", 1 + 2j), ("i", 1j), ("-i", -1j), ("1-i", 1 - 1j), ("0.3e-1", 0.03)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_classify_ha(capsys):
    code, out, err = run(["classify", "--coeffs", "1,0.5,0.5,1"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["class"] == "HA" and data["verdict"] is True and data["shadowing_verdict"] is True
    assert data["canonical_params"]["r"] == pytest.approx(0.5)
    assert data["multiplier"][0] == pytest.approx(1 / 3)
    assert "class: HA" in err


def test_classify_parabolic(capsys):
    code, out, _ = run(["classify", "--coeffs", "0,2,-2,4"], capsys)
    data = json.loads(out)
    assert code == 0 and data["class"] in ("PA", "PNA") and data["verdict"] is False


@pytest.mark.parametrize("coeffs", ["1,0,0,1", "2,0,0,1", "1,2,2,4"])
def test_classify_invalid_symbol_exit_2(coeffs, capsys):
    code, _, err = run(["classify", "--coeffs", coeffs], capsys)
    assert code == 2 and err


def test_classify_identity_message(capsys):
    _, _, err = run(["classify", "--coeffs", "1,0,0,1"], capsys)
    assert "identity map" in err


def test_config_errors_exit_3(capsys):
    assert run(["classify", "--coeffs", "1,2,3"], capsys)[0] == 3
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--coeffs", "1,0.5,0.5,1", "--tol", "-1"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "nonsense"])
    assert exc.value.code == 3
    assert run(["experiment", "spectral", "--a", "1.5"], capsys)[0] == 3
    assert run(["report", "--out", ""], capsys)[0] == 3


def test_lemma_experiment(capsys):
    code, out, err = run(["experiment", "lemma", "--s", "0.5", "--a", "1", "--nmax", "10000"], capsys)
    assert code == 0 and "violations: 0" in err
    assert json.loads(out)["rows"][0]["passed"] is True


def test_lemma_lists(capsys):
    code, out, _ = run(["experiment", "lemma", "--s-list", "0.1,0.9", "--a-list", "1+i,2i", "--nmax", "200"], capsys)
    assert code == 0 and len(json.loads(out)["rows"]) == 4


def test_gh_shadow_experiment(capsys):
    code, out, _ = run(["experiment", "gh-shadow", "--a", "0.5", "--delta", "0.05", "--L", "100"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["sup_error"] <= data["K"] * data["delta"]
    assert {"a", "delta", "K", "sup_error"} <= set(data)


def test_orbit_experiment_lower_bounds_grow(capsys):
    code, out, _ = run(
        ["experiment", "orbit", "--symbol", "parabolic", "--a", "2", "--s", "0.25", "--delta", "0.1", "--L", "200"], capsys
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 200
    bounds = [float(r["lower_bound"]) for r in rows if r["lower_bound"]]
    assert all(b2 >= b1 for b1, b2 in zip(bounds[5:], bounds[6:]))
    assert all(abs(float(r["residual"]) - 0.1) < 1e-12 for r in rows[:-1])


def test_orbit_experiment_rotation(capsys):
    code, out, _ = run(["experiment", "orbit", "--symbol", "rotation", "--L", "5"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[4]["value_at_alpha_re"]) == pytest.approx(0.5)
    assert float(rows[4]["lower_bound"]) == pytest.approx(0.5)


def test_shadow_experiment(capsys):
    code, out, err = run(["experiment", "shadow", "--symbol", "hna1", "--N", "64", "--L", "100"], capsys)
    data = json.loads(out)
    assert code == 0 and data["sup_error"] == pytest.approx(4.590240029237341, rel=1e-9)
    assert "sup_error" in err


def test_halfplane_experiment(capsys):
    code, out, _ = run(["experiment", "halfplane", "--a-list", "0.25,0.5"], capsys)
    assert code == 0 and json.loads(out)["max_discrepancy"] <= 1e-4


def test_spectral_experiment(capsys):
    code, out, err = run(["experiment", "spectral", "--a", "0.5", "--nmax", "5"], capsys)
    assert code == 0 and "bound violations: 0" in err
    assert out.splitlines()[0] == "n,measured_W,bound_W,measured_V,bound_V,root_W,root_V"


def test_report_table1_csv(capsys):
    code, out, _ = run(["report", "--suite", "table1", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 21
    assert list(rows[0]) == ["family", "param", "class", "verdict"]
    for r in rows:
        assert r["class"] == r["family"]
        assert (r["verdict"] == "true") == (r["family"] in ("HA", "HNA_I"))


def test_report_all_json(capsys):
    code, out, _ = run(["report"], capsys)
    data = json.loads(out)
    assert code == 0 and data["mismatches"] == 0 and len(data["table1"]) == 21
    assert data["ha_spectrum_annulus"]["outer"] == pytest.approx(3**0.5, abs=1e-4)


def test_output_files_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SHADOWLAB_OUT_DIR", str(tmp_path))
    assert main(["experiment", "gh-shadow", "--a", "0.25", "--L", "40", "--trials", "3", "--seed", "7"]) == 0
    first = (tmp_path / "gh_shadow.json").read_bytes()
    assert main(["experiment", "gh-shadow", "--a", "0.25", "--L", "40", "--trials", "3", "--seed", "7", "--out", "again.json"]) == 0
    assert (tmp_path / "again.json").read_bytes() == first
    assert main(["report", "--out", str(tmp_path / "sub" / "t.json")]) == 0
    assert json.loads((tmp_path / "sub" / "t.json").read_text())["mismatches"] == 0
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".shadowlab-")]


def test_no_partial_file_on_error(tmp_path, capsys):
    target = tmp_path / "c.json"
    assert main(["classify", "--coeffs", "2,0,0,1", "--out", str(target)]) == 2
    assert not target.exists() and os.listdir(tmp_path) == []


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "shadowlab", "classify", "--coeffs", "1,0.5,0.5,1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["class"] == "HA"
