import csv
import io
import json

import numpy as np
import pytest
from conftest import DATA

from szegedy_gibbs.bayesnet import BayesianNetwork
from szegedy_gibbs.chains import multiset_distance
from szegedy_gibbs.cli import main
from szegedy_gibbs.embedding import GateList, decompose_multiplexors


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_matches_golden(capsys):
    code, out, _ = run(capsys, "spectrum", DATA / "seeded_three_node.json")
    assert code == 0
    got = json.loads(out)
    golden = json.loads((DATA / "golden_spectrum_seeded_three_node.json").read_text())
    ev = np.array([complex(*v) for v in got["spectrum"]["eigenvalues"]])
    ref = np.array([complex(*v) for v in golden["eigenvalues"]])
    assert multiset_distance(ev, ref, cluster_tol=1e-5) < 1e-9
    assert got["delta"] == pytest.approx(golden["delta"], abs=1e-9)
    assert got["residuals"]["detailed_balance"] < 1e-12


def test_spectrum_csv(capsys, tmp_path):
    out_file = tmp_path / "spec.csv"
    code, _, _ = run(capsys, "spectrum", DATA / "two_node.json", "--format", "csv", "--out", out_file)
    assert code == 0
    rows = list(csv.DictReader(out_file.open()))
    assert list(rows[0]) == ["j", "re", "im", "modulus", "phi", "eta"]
    assert float(rows[0]["re"]) == pytest.approx(1.0)
    assert float(rows[1]["re"]) == pytest.approx(3 / 13)


def test_malformed_input(capsys):
    code, out, err = run(capsys, "spectrum", DATA / "malformed.json")
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "network_format"
    assert payload["field"] == "nodes[1].cpt[1]"


def test_missing_file(capsys):
    code, _, err = run(capsys, "verify", DATA / "nope.json")
    assert code == 2 and json.loads(err)["error"] == "usage"


@pytest.mark.parametrize("name", ["single_node", "uniform3"])
def test_verify_symmetric_passes(capsys, name):
    code, out, _ = run(capsys, "verify", DATA / f"{name}.json")
    report = json.loads(out)
    assert code == 0 and report["ok"]
    assert report["checks"]["walk_busy_eigenpairs"]["status"] == "pass"


def test_verify_generic_reports_skips(capsys):
    code, out, _ = run(capsys, "verify", DATA / "two_node.json")
    report = json.loads(out)
    assert code == 0 and report["normal_M_hyb"] is False
    assert "walk_busy_eigenpairs" in report["skipped"]
    assert report["checks"]["walk_spectrum_singular"]["status"] == "pass"


def test_compile_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "compile", DATA / "seeded_three_node.json", "--out", tmp_path)
    assert code == 0
    assert len(json.loads(out)["files"]) == 2
    net = BayesianNetwork.from_json(DATA / "seeded_three_node.json")
    for which in (1, 2):
        gl = GateList.from_text((tmp_path / f"U{which}.gates").read_text())
        ref = decompose_multiplexors(net, which)
        assert np.abs(gl.dense() - ref.dense()).max() < 1e-12


@pytest.mark.parametrize("method", ["quantum", "classical"])
def test_sample_deterministic(capsys, method):
    args = ["sample", DATA / "two_node.json", "--method", method, "--shots", 300, "--seed", 4]
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second
    report = json.loads(first)
    assert sum(report["counts"]) == 300
    if method == "quantum":
        assert report["W_applications"] > 0


def test_sample_csv_and_overrides(capsys):
    code, out, _ = run(capsys, "sample", DATA / "two_node.json", "--format", "csv", "--shots", 50,
                       "--probe-bits", 3, "--pe-steps", 1, "--grover-iters", 1, "--x0", "1,1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["assignment"] for r in rows] == ["00", "01", "10", "11"]
    assert sum(int(r["count"]) for r in rows) == 50


@pytest.mark.parametrize("bad", [["--shots", "0"], ["--epsilon2", "1.5"], ["--x0", "0,7"], ["--x0", "0"]])
def test_sample_usage_errors(capsys, bad):
    code, _, err = run(capsys, "sample", DATA / "two_node.json", *bad)
    assert code == 2 and "error" in json.loads(err)


def test_compare_csv(capsys):
    code, out, _ = run(capsys, "compare", DATA / "single_node.json", DATA / "uniform3.json", "--shots", 100)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "net,delta,eps_target,a,c,L,W_applications,classical_sweeps,tv_quantum,tv_classical"
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["net"] for r in rows] == ["single_node", "uniform3"]
    assert all(int(r["classical_sweeps"]) == 1 for r in rows)


def test_compare_no_match(capsys):
    code, _, err = run(capsys, "compare", DATA / "*.nothing")
    assert code == 2
