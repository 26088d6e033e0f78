from __future__ import annotations

import copy
import json

import jsonschema
import pytest
from click.testing import CliRunner

from lcw import io
from lcw.cli import main

REPORT_SCHEMA = io.load_schema("report")
TORUS = ["flat-t2", "flat-nc-torus-1-3", "flat-nc-torus-1-5", "flat-nc-torus-1-5-self-dagger",
         "fuzzy-q5-positive", "laurent-positive-1-5", "fuzzy-q5-mixed", "laurent-mixed-1-5"]


def run(*args):
    result = CliRunner().invoke(main, [str(a) for a in args])
    report = json.loads(result.output) if result.output.startswith("{") else None
    if report is not None:
        jsonschema.validate(report, REPORT_SCHEMA)
    return result.exit_code, report


def doc_path(name):
    return io.shipped_path(name)


def write_doc(tmp_path, doc, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


# -- check -------------------------------------------------------------------------
@pytest.mark.parametrize("name", io.shipped_names())
def test_check_shipped(name):
    code, report = run("check", doc_path(name))
    assert code == 0, report
    assert report["ok"] and report["geometry"]["name"] == name
    assert all(c["passed"] for c in report["validation"].values())


def test_check_non_idempotent_gram(tmp_path):
    doc = copy.deepcopy(io.load_document(doc_path("flat-nc-torus-1-5")))
    doc["frame"]["gram"][0][0] = [[[0, 0], ["2/1"]]]
    code, report = run("check", write_doc(tmp_path, doc))
    assert code == 1
    assert "frame projection" in report["error"]
    assert not report["validation"]["frame projection"]["passed"]


def test_missing_file(tmp_path):
    code, report = run("check", tmp_path / "absent.json")
    assert code == 2
    assert report["error"].startswith("input error")


def test_schema_violation_is_input_error(tmp_path):
    doc = copy.deepcopy(io.load_document(doc_path("flat-t2")))
    doc["backend"] = "sphere"
    code, report = run("check", write_doc(tmp_path, doc))
    assert code == 2 and not report["ok"]


def test_reports_are_byte_stable(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        code, _ = run("connect", doc_path("fuzzy-q5-mixed"), "--method", "both", "--out", out)
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_timings_flag():
    _, plain = run("check", doc_path("flat-t2"))
    _, timed = run("check", doc_path("flat-t2"), "--timings")
    assert "timings" not in plain
    assert "validate" in timed["timings"]


# -- connect -------------------------------------------------------------------------
@pytest.mark.parametrize("name", TORUS)
def test_connect_shipped(name):
    code, report = run("connect", doc_path(name))
    assert code == 0, report.get("error")
    cert = report["certification"]
    assert all(cert[k] for k in ("hermitian", "torsion_free", "dag_concordant", "bimodule", "metric_compatible"))
    assert report["torsion"]["vanishes"]


def test_connect_both_on_mixed_frame():
    code, report = run("connect", doc_path("fuzzy-q5-mixed"), "--method", "both")
    assert code == 0
    assert set(report["methods"]) == {"series", "closed"}
    assert report["comparison"]["equivalent"]
    assert report["connection_form"]
    assert report["torsion"]["W_norm"] > 0
    assert report["projections"]["friedrichs_angle"] == pytest.approx(0.5)


def test_connect_flat_has_zero_form():
    code, report = run("connect", doc_path("flat-nc-torus-1-5"), "--method", "series")
    assert code == 0
    assert report["connection_form"] == []
    assert report["curvature"]["max_norm_on_frame"] == 0.0


def test_connect_curved_grid():
    code, report = run("connect", doc_path("curved-t3"))
    assert code == 0
    assert report["geometry"]["shape"] == [32, 32, 32]
    assert report["curvature"]["max_norm_on_frame"] > 0.1


# -- projections -------------------------------------------------------------------------
def test_projections_fuzzy_compares_paths():
    code, report = run("projections", doc_path("fuzzy-q5-positive"))
    assert code == 0
    proj = report["projections"]
    assert proj["friedrichs_angle"] == pytest.approx(0.5)
    assert proj["iterative_vs_group_average"] < 1e-10


def test_projections_laurent_group_average():
    code, report = run("projections", doc_path("laurent-mixed-1-5"))
    assert code == 0
    assert report["projections"]["method"] == "group-average"
    assert "iterative_vs_group_average" not in report["projections"]


def test_projections_non_convergence():
    code, report = run("projections", doc_path("fuzzy-q5-mixed"), "--method", "iterative", "--max-iter", "1")
    assert code == 3
    assert report["projections"]["iterations"] == 1


# -- oracle and compare -------------------------------------------------------------------
def test_oracle_point():
    code, report = run("oracle", doc_path("curved-t3"), "--point", "0,0,16")
    assert code == 0
    (row,) = report["christoffel"]
    assert row["gamma"]["2,1,1"] == pytest.approx([1.0, 0.0])


def test_oracle_rejects_torus_documents():
    code, _ = run("oracle", doc_path("flat-t2"))
    assert code == 2


def test_oracle_bad_point():
    code, _ = run("oracle", doc_path("curved-t3"), "--point", "0,0")
    assert code == 2


def test_compare_curved_t3():
    code, report = run("compare", doc_path("curved-t3"))
    assert code == 0
    assert report["comparison"]["max_abs_difference"] < 1e-8


# -- junk ---------------------------------------------------------------------------------
def test_junk_classical_symmetric():
    code, report = run("junk", doc_path("flat-t2"), "--generator", "1,1", "--generator", "2,-1")
    assert code == 0
    assert [r["generator"] for r in report["junk"]] == [[1, 1], [2, -1]]
    assert all(r["in_image_of_psi"] for r in report["junk"])


def test_junk_nc_torus():
    code, report = run("junk", doc_path("laurent-positive-1-5"), "--generator", "1,0", "--generator", "1,2")
    assert code == 0
    assert all(r["in_image_of_psi"] and r["norm"] > 0 for r in report["junk"])


def test_junk_constants_are_skipped():
    code, report = run("junk", doc_path("flat-nc-torus-1-5"), "--generator", "0,0")
    assert code == 0
    assert report["junk"] == []


def test_junk_bad_generator():
    code, _ = run("junk", doc_path("flat-t2"), "--generator", "x")
    assert code == 2


def test_version():
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
