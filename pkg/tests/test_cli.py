import json
import subprocess
import sys

import numpy as np

from supereig.cli import main
from supereig.mesh import build_domain, read_mesh


def _error(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def test_run_csv(tmp_path, capsys):
    code = main(["run", "--example", "1", "--element", "cr,p1", "--levels", "2-4",
                 "--post", "rea,exp", "--format", "csv", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary == {"experiment": "example1", "tables": 2, "out": str(tmp_path)}
    text = (tmp_path / "example1_CR_eig1.csv").read_text().splitlines()
    assert text[0].startswith("level,h,h_max,n_dofs,lambda_h,error,order,rea_value")
    assert text[2].split(",")[5] == "-3.41E-01"
    assert (tmp_path / "example1_P1_eig1.csv").exists()


def test_run_json_and_matrices(tmp_path, capsys):
    code = main(["run", "--example", "2", "--levels", "2,3", "--post", "", "--format", "json",
                 "--out", str(tmp_path), "--export-matrices"])
    assert code == 0
    rep = json.loads((tmp_path / "example2.json").read_text())
    assert rep["bc"]["right"] == "neumann"
    assert [r["level"] for r in rep["tables"][0]["rows"]] == [2, 3]
    assert (tmp_path / "example2_CR_L3_stiffness.txt").exists()


def test_mesh_command(tmp_path, capsys):
    out = tmp_path / "l.txt"
    assert main(["mesh", "--domain", "l-shape", "--level", "2", "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["triangles"] == 24
    t, r = build_domain("l-shape", 2), read_mesh(out)
    np.testing.assert_array_equal(r.triangles, t.triangles)


def test_usage_errors_are_json(capsys):
    assert main(["run", "--example", "7", "--out", "x"]) == 2
    err = _error(capsys)
    assert err["error"] == "UsageError" and "--example" in err["message"]
    assert main(["frobnicate"]) == 2
    assert _error(capsys)["error"] == "UsageError"


def test_runtime_errors_are_json(tmp_path, capsys):
    assert main(["run", "--example", "1", "--element", "rt0", "--out", str(tmp_path)]) == 1
    err = _error(capsys)
    assert err["error"] == "ExperimentError" and "RT0" in err["message"]
    assert main(["run", "--example", "1", "--levels", "x-y", "--out", str(tmp_path)]) == 1
    assert _error(capsys)["error"] == "ExperimentError"
    assert main(["mesh", "--domain", "unit-square", "--level", "0", "--out", str(tmp_path / "m")]) == 1
    assert _error(capsys)["error"] == "MeshError"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "supereig.cli", "mesh", "--domain", "unit-square",
                           "--level", "1", "--out", str(tmp_path / "sq.txt")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "sq.txt").read_text().startswith("NODES 4")
    proc = subprocess.run([sys.executable, "-m", "supereig.cli", "run"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["error"] == "UsageError"
