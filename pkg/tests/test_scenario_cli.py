import copy
import csv
import io
import json
import os

import pytest

from robust_welfare import cli
from robust_welfare.errors import InfeasibleScenario, InfeasibleShape, SchemaError, SignConventionViolated
from robust_welfare.scenario import emit_scenario, load_scenario, parse_scenario, scenario_to_dict

from conftest import SCENARIO_DIR


@pytest.fixture
def doc(canonical_path):
    with open(canonical_path) as fh:
        return json.load(fh)


def _write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_canonical_file_parses(canonical_path):
    sc = load_scenario(canonical_path)
    assert sc.mode == "specific"
    assert (sc.inv.alpha, sc.inv.beta) == (1.0, 2.0)
    assert sc.oracle.samples == 10000


def test_shipped_scenarios_parse():
    for name in sorted(os.listdir(SCENARIO_DIR)):
        assert load_scenario(os.path.join(SCENARIO_DIR, name)) is not None


def test_round_trip():
    for name in sorted(os.listdir(SCENARIO_DIR)):
        sc = load_scenario(os.path.join(SCENARIO_DIR, name))
        assert parse_scenario(emit_scenario(sc)) == sc
        assert parse_scenario(scenario_to_dict(sc)) == sc


def test_zero_pass_through_rejected(doc):
    doc["pass_through"]["rho_lo"] = 0.0
    with pytest.raises(SchemaError) as exc:
        parse_scenario(doc)
    assert any("pass_through" in locus for locus, _ in exc.value.errors)


def test_conduct_above_one_rejected(doc):
    doc["conduct"]["kappa_hi"] = 1.5
    with pytest.raises(SchemaError):
        parse_scenario(doc)


def test_all_errors_reported(doc):
    doc["conduct"]["kappa_hi"] = 1.5
    doc["pass_through"]["rho_lo"] = -1
    doc["shape"]["transform"] = "cubic"
    del doc["snapshots"]["post"]["price"]
    with pytest.raises(SchemaError) as exc:
        parse_scenario(doc)
    assert len(exc.value.errors) >= 4


def test_bad_json():
    with pytest.raises(SchemaError):
        parse_scenario("{not json")


def test_model_errors_surface(doc):
    bad = copy.deepcopy(doc)
    bad["snapshots"]["post"]["quantity"] = 120.0
    with pytest.raises(SignConventionViolated):
        parse_scenario(bad)
    bad = copy.deepcopy(doc)
    bad["pass_through"] = {"rho_lo": 0.9, "rho_hi": 1.0}
    with pytest.raises(InfeasibleScenario):
        parse_scenario(bad)
    bad = copy.deepcopy(doc)
    bad["shape"].update(f_lo=-6.0, f_hi=-5.0)
    with pytest.raises(InfeasibleShape):
        parse_scenario(bad)


def test_bounds_command(canonical_path, capsys):
    assert cli.main(["bounds", canonical_path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["cutoffs"]["max"] == 11.0 and report["cutoffs"]["min"] == 11.0
    assert report["bounds"]["TR"]["lower"] == report["bounds"]["TR"]["upper"] == 240.0
    corner = report["bounds"]["PS"]["lower_corner"]
    assert {"path_branch", "demand_direction", "kappa", "blocks", "i1", "i2"} <= set(corner)
    assert report["format_version"] == 1


def test_bounds_to_file(canonical_path, tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["bounds", canonical_path, "--out", str(out), "--tol", "1e-11"]) == 0
    report = json.loads(out.read_text())
    assert report["settings"]["quadrature_rel_tol"] == 1e-11


def test_report_reproduces_through_descriptors(canonical_path):
    from robust_welfare.welfare_engine import GENERIC_QUAD, corner_from_descriptor, welfare_at_corner

    sc = load_scenario(canonical_path)
    report = cli.bounds_report(sc)
    for name, entry in report["bounds"].items():
        for end in ("lower", "upper"):
            desc = entry[f"{end}_corner"]
            if desc is None:
                continue
            bd = welfare_at_corner(corner_from_descriptor(sc, desc), sc.change, GENERIC_QUAD)
            got = -bd.delta_ts if name == "DWL" else bd.value(name)
            assert got == pytest.approx(entry[end], rel=1e-8)


def test_verify_and_self_test(canonical_path, tmp_path):
    out = tmp_path / "v.json"
    args = ["verify", canonical_path, "--samples", "500", "--grid", "128", "--out", str(out)]
    assert cli.main(args) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert cli.main(args + ["--self-test"]) == 3
    rep = json.loads(out.read_text())
    assert rep["n_violations"] >= 1 and rep["self_test"] is True


def test_curves_command(canonical_path, capsys):
    assert cli.main(["curves", canonical_path]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    by_corner = {}
    for r in rows:
        by_corner.setdefault((r["object"], r["end"]), []).append(r)
    assert all(len(v) == 101 for v in by_corner.values())
    for v in by_corner.values():
        assert float(v[0]["p"]) == 10.0 and float(v[0]["Q"]) == 100.0
        assert float(v[-1]["p"]) == 12.0 and float(v[-1]["Q"]) == pytest.approx(80.0, rel=1e-10)
        assert float(v[-1]["tau"]) == pytest.approx(3.0, rel=1e-12)


def test_mc_command(canonical_path, capsys):
    assert cli.main(["mc", canonical_path, "--resolution", "5"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows and {"Q", "MC", "lerner"} <= set(rows[0])


def test_exit_codes(doc, tmp_path, capsys):
    bad = copy.deepcopy(doc)
    bad["conduct"]["kappa_hi"] = 1.5
    assert cli.main(["bounds", _write(tmp_path, bad)]) == 2
    bad = copy.deepcopy(doc)
    bad["pass_through"] = {"rho_lo": 0.9, "rho_hi": 1.0}
    assert cli.main(["bounds", _write(tmp_path, bad)]) == 2
    assert cli.main(["bounds", str(tmp_path / "missing.json")]) == 1
    assert cli.main(["bounds", _write(tmp_path, doc), "--tol", "-1"]) == 2
    assert cli.main(["mc", os.path.join(SCENARIO_DIR, "ad_valorem.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_ad_valorem_bounds_report(capsys):
    assert cli.main(["bounds", os.path.join(SCENARIO_DIR, "ad_valorem.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["bounds"]) == {"CS", "PS", "TS_priv"}
    assert report["unavailable"] == ["TR", "TS", "DWL"]
    assert report["cutoffs"]["scale"] == "log_price"
