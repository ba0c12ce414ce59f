"""End-to-end command-line behavior: exit codes, witnesses, report formats."""

import json

import pytest

from pnalgebroid.cli import main
from pnalgebroid.specio import parse_document, serialize_document


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_riesz_on_aff1(capsys):
    code, out, _ = run(capsys, "riesz", "aff1", "--points", "100", "--seed", "7")
    assert code == 0
    assert "PASS" in out
    assert "indices: [1]" in out


def test_check_sn_on_toda_atiyah_spec_file(tmp_path, capsys):
    code, out, _ = run(capsys, "fixture", "toda", "--n", "2", "--block", "atiyah")
    assert code == 0
    spec = tmp_path / "atiyah.json"
    spec.write_text(out)
    code, out, _ = run(capsys, "check-sn", str(spec))
    assert code == 0
    assert "FAIL" not in out


def test_check_poisson_perturbed_spec_exits_one_with_witness(tmp_path, capsys):
    code, out, _ = run(capsys, "fixture", "toda", "--n", "2", "--block", "canonical")
    doc = parse_document(out)
    # perturb lam0 so that the Jacobi identity breaks
    obj = json.loads(serialize_document(doc))
    obj["bivectors"]["lam0"]["(Dq1,Dq2)"] = "p1*q1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "check-poisson", str(bad), "--bivector", "lam0")
    assert code == 1
    assert "FAIL" in out and "residual" in out


def test_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{oops")
    code, _, err = run(capsys, "check-algebroid", str(bad))
    assert code == 2
    assert "error" in err


def test_recursion_on_degenerate_pair_exits_one(capsys):
    code, out, _ = run(capsys, "recursion", "toda:2:flaschka")
    assert code == 1
    assert "degenerate" in out


def test_project_reports_endo_witness(capsys):
    code, out, _ = run(capsys, "project", "toda:2")
    assert code == 1
    assert "projectable bivector(lam0)" in out
    assert "FAIL  projectable endomorphism(N)" in out


def test_json_report_is_reproducible_modulo_timing(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(
            capsys, "riesz", "aff1", "--points", "10", "--seed", "3",
            "--format", "json",
        )
        assert code == 0
        obj = json.loads(out)
        for c in obj["checks"]:
            c.pop("seconds")
        outs.append(obj)
    assert outs[0] == outs[1]
    assert outs[0]["seed"] == 3


def test_hierarchy_command(capsys):
    code, out, _ = run(capsys, "hierarchy", "toda:2:atiyah", "--depth", "2")
    assert code == 0
    assert "compatible(levels 1,2)" in out


def test_tolerance_env_var_is_reported(monkeypatch, capsys):
    monkeypatch.setenv("PNALGEBROID_TOL", "1e-7")
    code, out, _ = run(
        capsys, "riesz", "aff1", "--points", "5", "--seed", "1", "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["tolerance"] == 1e-7


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert out.count("PASS") >= 10
