"""Config handling, report emission, and the experiment entry point."""

import csv
import json
import math

import numpy as np
import pytest

from bmklab import cli, mollify
from bmklab.exterior import DifferentialForm
from bmklab.fields import AnalyticField, PolyField, zmonomial


def test_parse_coefficient_polynomial_is_exact():
    f = cli.parse_coefficient("x1*x2 + 0.5", 2)
    assert isinstance(f, PolyField)
    assert f.terms == {(1, 1): 1.0 + 0j, (0, 0): 0.5 + 0j}
    x = np.array([[0.3, -0.7], [1.0, 2.0]])
    assert np.allclose(f(x), x[:, 0] * x[:, 1] + 0.5)


def test_parse_coefficient_analytic_fallback():
    f = cli.parse_coefficient("sin(x1) + x2", 2)
    assert isinstance(f, AnalyticField)
    x = np.array([[0.3, -0.7], [1.2, 0.4]])
    assert np.allclose(f(x), np.sin(x[:, 0]) + x[:, 1])


def test_form_json_round_trip_polynomial():
    form = DifferentialForm(2, 0, 1, {
        ((), (1,)): zmonomial(2, (0, 0), (0, 1)),
        ((), (2,)): PolyField(4, {(0, 0, 0, 0): 2.0 - 1.0j}),
    })
    back = cli.form_from_json(cli.form_to_json(form))
    assert back.n == form.n and back.bidegree == form.bidegree
    assert set(back.coeffs) == set(form.coeffs)
    for key in form.coeffs:
        assert back.coeffs[key].terms == form.coeffs[key].terms


def test_form_json_expr_coefficient():
    text = json.dumps({
        "n": 2, "bidegree": [0, 1],
        "terms": [{"dz": [], "dzbar": [1], "expr": "z1*zb2"}],
    })
    form = cli.form_from_json(text)
    x = np.array([[0.3, 0.1, -0.2, 0.4]])
    z1 = 0.3 + 0.1j
    zb2 = -0.2 - 0.4j
    assert np.allclose(form.coeffs[((), (1,))](x), z1 * zb2)


def test_form_json_grid_coefficient(tmp_path):
    bounds = [[-1.0, 0.0], [-1.0, 1.0]]

    def lin(x):
        return x[:, 0] + 2.0 * x[:, 1]

    fld = mollify.HalfSpaceField.from_function(lin, bounds, (33, 33))
    path = tmp_path / "coeff.npz"
    mollify.save_field(fld, str(path))
    text = json.dumps({
        "n": 1, "bidegree": [0, 1],
        "terms": [{"dz": [], "dzbar": [1], "grid": str(path)}],
    })
    form = cli.form_from_json(text)
    x = np.array([[-0.25, 0.5], [-0.5, -0.125]])
    assert np.allclose(form.coeffs[((), (1,))](x), lin(x), atol=1e-9)


def test_form_json_bad_entry_rejected():
    text = json.dumps({"n": 1, "bidegree": [0, 1],
                       "terms": [{"dz": [], "dzbar": [1]}]})
    with pytest.raises(ValueError, match="poly, expr, grid"):
        cli.form_from_json(text)


def test_experiment_config_validation_and_threshold_merge():
    with pytest.raises(ValueError, match="unknown experiment"):
        cli.ExperimentConfig(experiment="frobnicate")
    with pytest.raises(ValueError, match="nonnegative"):
        cli.ExperimentConfig(experiment="mollify", level=-1)
    with pytest.raises(ValueError, match="positive"):
        cli.ExperimentConfig(experiment="mollify", eps=(0.2, -0.1))
    cfg = cli.ExperimentConfig(experiment="bmk-verify",
                               thresholds={"final_max": 5e-4})
    assert cfg.thresholds["final_max"] == 5e-4
    assert cfg.thresholds["holo_max"] == 1e-8


def test_load_config_merges_common_and_section(tmp_path):
    path = tmp_path / "lab.ini"
    path.write_text(
        "[common]\nseed = 3\neps = 0.2,0.1\n"
        "[mollify]\ngrid_n = 65\nthreshold_trace_max = 0.5\n"
        "[bmk-verify]\nlevel = 2\n")
    kwargs = cli.load_config(str(path), "mollify")
    assert kwargs["seed"] == 3
    assert kwargs["eps"] == (0.2, 0.1)
    assert kwargs["grid_n"] == 65
    assert kwargs["thresholds"] == {"trace_max": 0.5}
    assert "level" not in kwargs


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[mollify]\ngrdi_n = 65\n")
    with pytest.raises(ValueError, match="unknown config key"):
        cli.load_config(str(path), "mollify")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ValueError, match="not readable"):
        cli.load_config(str(tmp_path / "nope.ini"), "mollify")


def _toy_report():
    return cli.Report(
        metadata={"experiment": "young-scan", "checks": {}, "verdict": "pass"},
        columns=["p", "r", "estimate"],
        rows=[{"p": 1.5, "r": math.inf, "estimate": 0.25}],
        verdict="pass")


def test_emit_report_csv_with_sidecar(tmp_path):
    out = str(tmp_path / "rep")
    paths = cli.emit_report(_toy_report(), out, "csv")
    assert paths == [out + ".csv", out + ".meta.json"]
    with open(paths[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["p", "r", "estimate"]
    assert rows[1] == ["1.5", "inf", "0.25"]
    meta = json.load(open(paths[1]))
    assert meta["verdict"] == "pass"


def test_emit_report_json_document(tmp_path):
    out = str(tmp_path / "rep")
    (path,) = cli.emit_report(_toy_report(), out, "json")
    doc = json.load(open(path))
    assert set(doc) == {"metadata", "columns", "rows", "verdict"}
    assert doc["rows"][0]["estimate"] == 0.25


def test_emit_report_empty_rows_header_only(tmp_path):
    rep = cli.Report(metadata={}, columns=["a", "b"], rows=[], verdict="fail")
    paths = cli.emit_report(rep, str(tmp_path / "empty"), "csv")
    with open(paths[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows == [["a", "b"]]


def test_emit_report_unknown_format(tmp_path):
    with pytest.raises(ValueError, match="unknown format"):
        cli.emit_report(_toy_report(), str(tmp_path / "rep"), "yaml")


def test_main_usage_errors(tmp_path, capsys):
    assert cli.main(["frobnicate"]) == 2
    capsys.readouterr()
    assert cli.main(["mollify", "--eps", "0.2,-0.1"]) == 2
    assert "usage error" in capsys.readouterr().err
    bad = tmp_path / "bad.ini"
    bad.write_text("[mollify]\nwat = 1\n")
    assert cli.main(["mollify", "--config", str(bad)]) == 2


def test_main_green_stokes_passes(tmp_path, capsys):
    out = str(tmp_path / "gs")
    assert cli.main(["green-stokes", "--out", out]) == 0
    captured = capsys.readouterr().out
    assert "verdict: pass" in captured
    meta = json.load(open(out + ".meta.json"))
    assert meta["verdict"] == "pass"
    assert all(chk["pass"] for chk in meta["checks"].values())


def test_main_short_ladder_mollify_fails(tmp_path, capsys):
    """A one-rung epsilon ladder never reaches the trace threshold; the
    harness must say so and exit 1 rather than papering over it."""
    ini = tmp_path / "short.ini"
    ini.write_text("[mollify]\ngrid_n = 65\neps = 0.2\n")
    out = str(tmp_path / "mf")
    assert cli.main(["mollify", "--config", str(ini), "--out", out]) == 1
    assert "trace_final: FAIL" in capsys.readouterr().out
    meta = json.load(open(out + ".meta.json"))
    assert meta["verdict"] == "fail"
    assert meta["checks"]["trace_final"]["pass"] is False


def test_main_young_scan_deterministic(tmp_path, capsys):
    out1, out2 = str(tmp_path / "y1"), str(tmp_path / "y2")
    assert cli.main(["young-scan", "--out", out1]) == 0
    assert cli.main(["young-scan", "--out", out2]) == 0
    capsys.readouterr()
    with open(out1 + ".csv", "rb") as fh1, open(out2 + ".csv", "rb") as fh2:
        assert fh1.read() == fh2.read()


def test_main_flag_beats_config(tmp_path, capsys):
    ini = tmp_path / "seeded.ini"
    ini.write_text("[common]\nseed = 5\n")
    out = str(tmp_path / "gs")
    assert cli.main(["green-stokes", "--config", str(ini),
                     "--seed", "3", "--out", out]) == 0
    capsys.readouterr()
    meta = json.load(open(out + ".meta.json"))
    assert meta["seed"] == 3
