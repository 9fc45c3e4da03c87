import csv
import io
import json
import subprocess
import sys

import pytest

from entfid.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_report_maximally_mixed_replacement(capsys):
    code, out, _ = run(capsys, "report", "--state", "mixed:dim=2", "--channel", "replace_with")
    assert code == 0
    data = json.loads(out)
    assert data["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert data["fe_kraus"] == pytest.approx(0.25, abs=1e-9)
    assert data["fe_purification"] == pytest.approx(0.25, abs=1e-9)


def test_report_csv(capsys):
    code, out, _ = run(capsys, "report", "--state", "basis:dim=2", "--channel", "identity", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert code == 0 and float(rows["fidelity"]) == 1.0


def test_report_with_search(capsys):
    code, out, _ = run(
        capsys, "report", "--state", "mixed", "--channel", "replace_with", "--search",
        "--restarts", "2", "--iterations", "800", "--dt", "2",
    )
    data = json.loads(out)
    assert code == 0
    assert data["search"]["f2"]["search_value"] == pytest.approx(0.25, abs=1e-3)


def test_bad_trace_file_exits_2(tmp_path, capsys):
    path = tmp_path / "rho.json"
    path.write_text(json.dumps({"dim": 2, "entries": [[0.5, 0], [0, 0], [0, 0], [0.4, 0]]}))
    code, _, err = run(capsys, "report", "--state", str(path))
    assert code == 2
    assert "trace" in err


def test_missing_file_exits_2(capsys):
    code, _, err = run(capsys, "report", "--state", "/nonexistent/rho.json")
    assert code == 2 and err.startswith("error:")


def test_dimension_mismatch_exits_2(capsys):
    code, _, _ = run(capsys, "report", "--state", "mixed:dim=2", "--channel", "identity:dim=3")
    assert code == 2


def test_sweep_values(capsys):
    code, out, _ = run(capsys, "sweep", "--channel", "depolarizing", "--grid", "0,0.5,1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["parameter", "fidelity", "entanglement_fidelity"]
    for p, f, fe in rows[1:]:
        assert float(f) == pytest.approx(1.0, abs=1e-9)
        assert float(fe) == pytest.approx(1 - 3 * float(p) / 4, abs=1e-9)


@pytest.mark.parametrize("grid", ["", ",", "a,b"])
def test_sweep_bad_grid_exits_2(capsys, grid):
    code, _, _ = run(capsys, "sweep", "--grid", grid)
    assert code == 2


def test_epr_demo_default_runs_f2_search(capsys):
    code, out, _ = run(capsys, "epr-demo", "--restarts", "2", "--iterations", "1000")
    assert code == 0
    assert "F2 search" in out and "F1 search" not in out
    assert out.strip().endswith("match")
    code2, out2, _ = run(capsys, "epr-demo", "--restarts", "2", "--iterations", "1000")
    assert out == out2


def test_epr_demo_table_without_search(capsys):
    code, out, _ = run(capsys, "epr-demo", "--no-search")
    assert code == 0 and "search" not in out
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines() if line.startswith("E")}
    assert [float(v) for v in rows["E1"]] == [1.0, 1.0]
    assert [float(v) for v in rows["E2"]] == [1.0, 0.25]


@pytest.mark.parametrize("family,fe", [("identity", 1.0), ("replace_with", 0.25)])
def test_sweep_constant_families(capsys, family, fe):
    code, out, _ = run(capsys, "sweep", "--channel", family, "--grid", "0,0.5,1")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == 0 and len(rows) == 3
    for _, f, value in rows:
        assert float(f) == pytest.approx(1.0, abs=1e-9)
        assert float(value) == pytest.approx(fe, abs=1e-9)


def test_report_identity(capsys):
    code, out, _ = run(capsys, "report", "--state", "random:dim=3,seed=4", "--channel", "identity")
    data = json.loads(out)
    assert code == 0
    assert data["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert data["fe_kraus"] == pytest.approx(1.0, abs=1e-9)


def test_tolerance_override_can_fail_a_property(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "2", "--tol", "fidelity_symmetry=0")
    rows = {r["property"]: r for r in csv.DictReader(io.StringIO(out))}
    assert rows["fidelity_symmetry"]["tol"] == "0"
    assert code in (0, 1)
    assert (rows["fidelity_symmetry"]["pass"] == "true") == (float(rows["fidelity_symmetry"]["max_violation"]) == 0)


def test_tolerance_override_in_report(capsys):
    code, out, _ = run(capsys, "report", "--state", "mixed", "--tol", "fe_formulas_agree=1e-3")
    rows = {q["name"]: q for q in json.loads(out)["inequalities"]}
    assert code == 0 and rows["fe_formulas_agree"]["rhs"] == 1e-3


@pytest.mark.parametrize("tol", ["bogus=1", "fidelity_symmetry", "fidelity_symmetry=x", "fidelity_symmetry=-1"])
def test_bad_tolerance_override_exits_2(capsys, tol):
    assert run(capsys, "verify", "--samples", "1", "--tol", tol)[0] == 2


def test_verify_single_sample(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 14 and all(r["pass"] == "true" for r in rows)


def test_verify_injected_fault_exits_1(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "3", "--inject-fault")
    rows = {r["property"]: r["pass"] for r in csv.DictReader(io.StringIO(out))}
    assert code == 1
    assert rows["channel_completeness"] == "false"


def test_verify_rejects_zero_samples(capsys):
    assert run(capsys, "verify", "--samples", "0")[0] == 2


def test_kl_check(capsys):
    code, out, _ = run(
        capsys, "kl-check", "--channel", "depolarizing:p=0.1", "--samples", "10",
        "--restarts", "2", "--iterations", "500",
    )
    data = json.loads(out)
    assert code == 0 and data["pass"]
    assert data["eps_hat"] == pytest.approx(0.05, abs=1e-9)


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("ENTFID_SEED", "nope")
    assert run(capsys, "verify", "--samples", "1")[0] == 2


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert run(capsys, "report", "--state", "mixed", "--out", str(path))[0] == 0
    assert json.loads(path.read_text())["fe_kraus"] == pytest.approx(1.0)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entfid", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "epr-demo" in proc.stdout
