from __future__ import annotations

import csv
import io
import json

import jsonschema
import pytest

from flataffine import cli, suites
from flataffine.report import FAIL, PASS, VerificationReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def schema():
    return suites.load_schema()


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    listing = json.loads(out)
    assert code == 0
    names = {n for names in listing.values() for n in names}
    assert {"F1", "E3", "P6", "orthant:<i>", "parabola"} <= names
    assert len(listing["lsa"]) == 12
    assert run(capsys, "catalog", "list")[1] == out


def test_catalog_list_csv(capsys):
    _, out, _ = run(capsys, "catalog", "list", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["kind", "name"] and ["lsa", "E3"] in rows


def test_verify_lsa_e3(capsys, schema):
    code, out, _ = run(capsys, "verify", "lsa", "E3")
    reports = json.loads(out)
    jsonschema.validate(reports, schema)
    assert code == 0 and len(reports) == 3
    assert all(r["status"] == "pass" and r["residual"] == "exact-0" for r in reports)


def test_verify_lsa_family_expands(capsys):
    _, out, _ = run(capsys, "verify", "lsa", "F2")
    assert len(json.loads(out)) == 15
    _, out, _ = run(capsys, "verify", "lsa", "F2(1/2)")
    assert [r["check"] for r in json.loads(out)][0] == "torsion-free:F2(1/2)"


def test_verify_devmap_d6(capsys, schema):
    code, out, _ = run(capsys, "verify", "devmap", "D6")
    reports = {r["check"]: r for r in json.loads(out)}
    jsonschema.validate(list(reports.values()), schema)
    assert reports["equivariance:D6/rho6"]["status"] == "fail"
    assert "known erratum" in reports["equivariance:D6/rho6"]["note"]
    assert reports["equivariance:D6/rho6-corrected"]["status"] == "pass"
    assert code == 1
    assert run(capsys, "verify", "devmap", "D6", "--allow-errata")[0] == 0


def test_verify_rep(capsys):
    code, out, _ = run(capsys, "verify", "rep", "rho4")
    assert code == 0 and {r["check"] for r in json.loads(out)} == {"homomorphism:rho4", "differential:rho4"}


def test_verify_stabilizer_orthant(capsys):
    code, out, _ = run(capsys, "verify", "stabilizer", "orthant:1", "--n", "2")
    dim, closure = json.loads(out)
    assert code == 0
    assert dim["status"] == "pass" and dim["note"].startswith("dimension 4")
    assert closure["check"] == "associative-closure:orthant:1@R2" and closure["status"] == "pass"


def test_verify_stabilizer_parabola_is_negative_control(capsys):
    code, out, _ = run(capsys, "verify", "stabilizer", "parabola")
    assert code == 1 and "negative-control" in json.loads(out)[1]["note"]
    assert run(capsys, "verify", "stabilizer", "parabola", "--allow-errata")[0] == 0


def test_csv_one_row_per_report(capsys):
    _, out, _ = run(capsys, "verify", "devmap", "D5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and rows[0]["check"] == "equivariance:D5/rho5"


def test_trace_geodesic_csv(capsys):
    code, out, _ = run(capsys, "trace", "geodesic", "--gamma", "P5", "--x0", "0,0", "--u0", "1,2",
                       "--t", "1", "--steps", "100")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["t", "x1", "x2", "Dx1", "Dx2"] and len(rows) == 102
    t, _, _, d1, d2 = map(float, rows[-1])
    assert abs(d1 - (1 + t)) < 1e-8 and abs(d2 - (1 + 2 * t)) < 1e-8


def test_trace_domain_exit(capsys):
    code, out, err = run(capsys, "trace", "geodesic", "--gamma", "P5", "--x0", "0,0", "--u0=-2,0")
    assert code == 1 and out == "" and "left the chart" in err


@pytest.mark.parametrize("argv", [
    ["verify", "lsa", "Q7"],
    ["verify", "devmap", "D9"],
    ["verify", "stabilizer", "annulus"],
    ["verify", "rep", "rho9"],
    ["frobnicate"],
    ["verify", "lsa"],
    ["trace", "geodesic", "--gamma", "P5", "--x0", "a,b", "--u0", "1,0"],
    ["trace", "geodesic", "--gamma", "E1", "--x0", "-1,0", "--u0", "1,0"],
    ["report", "all", "--seed", "x"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err.startswith("flataffine: error:")


def test_exit_code_contract():
    errata = {"known": {"kind": "erratum", "note": ""}}
    ok = VerificationReport("a", PASS, 0.0, 1.0)
    known = VerificationReport("known", FAIL, 1.0, 0.0)
    other = VerificationReport("other", FAIL, 1.0, 0.0)
    assert cli.exit_code([ok], errata, False) == 0
    assert cli.exit_code([ok, known], errata, False) == 1
    assert cli.exit_code([ok, known], errata, True) == 0
    assert cli.exit_code([known, other], errata, True) == 1


def test_errata_manifest_shape():
    errata = suites.load_errata()
    assert {"equivariance:D4/rho4", "equivariance:D6/rho6"} <= set(errata)
    assert all(e["kind"] in ("erratum", "negative-control") and e["note"] for e in errata.values())
