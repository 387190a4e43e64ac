import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from nativespace.cli import main


def write_problem(tmp_path, name="problem.json", **overrides):
    problem = {
        "version": 1,
        "operator": {"type": "derivative", "order": 2},
        "space": "L2",
        "phi": "hermite-gaussian",
        "data": [[0, 0], [1, 1], [2, 0]],
    }
    problem.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(problem))
    return str(path)


def test_check_passes(tmp_path):
    assert main(["check", write_problem(tmp_path)]) == 0


def test_check_rejects_delta_phi_for_measure_space(tmp_path, capsys):
    path = write_problem(tmp_path, space="M", phi="delta")
    assert main(["check", path]) == 1
    assert "phi not admissible for X = C0" in capsys.readouterr().out


@pytest.mark.parametrize("text", ["{not json", json.dumps({"version": 1}), json.dumps({
    "version": 1, "operator": {"type": "derivative", "order": 2}, "space": "L2", "data": [], "extra": 1})])
def test_malformed_problem_exits_2(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert main(["check", str(path)]) == 2


def test_missing_file_exits_2(tmp_path):
    assert main(["check", str(tmp_path / "absent.json")]) == 2


def test_unsupported_order_exits_2(tmp_path):
    assert main(["check", write_problem(tmp_path, operator={"type": "derivative", "order": 7})]) == 2


def test_solve_measure_space(tmp_path):
    out = tmp_path / "run.json"
    path = write_problem(tmp_path, operator={"type": "derivative", "order": 1}, space="M")
    assert main(["solve", path, "--out-json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert abs(report["solution"]["objective"] - 2.0) <= 1e-5 * 2
    assert len(report["solution"]["knots"]) <= 2
    assert report["invariants"]["pass"] is True


def test_solve_l2_csv_matches_natural_spline(tmp_path):
    out_csv = tmp_path / "f.csv"
    assert main(["solve", write_problem(tmp_path), "--out-csv", str(out_csv)]) == 0
    with open(out_csv) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "f", "Lf"]
    arr = np.array(rows[1:], dtype=float)
    inside = (arr[:, 0] >= 0) & (arr[:, 0] <= 2)
    ref = CubicSpline([0, 1, 2], [0, 1, 0], bc_type="natural")(arr[inside, 0])
    assert np.max(np.abs(arr[inside, 1] - ref)) <= 1e-4


def test_solve_lp_two_uses_l2_solver(tmp_path, capsys):
    assert main(["solve", write_problem(tmp_path, space={"Lp": 2})]) == 0
    assert "objective" in capsys.readouterr().out


def test_solve_general_lp_is_domain_failure(tmp_path):
    assert main(["solve", write_problem(tmp_path, space={"Lp": 3})]) == 1


def test_solve_underdetermined(tmp_path, capsys):
    path = write_problem(tmp_path, data=[[0.0, 1.0]])
    assert main(["solve", path]) == 1
    assert "underdetermined null space" in capsys.readouterr().err


def test_suite_default_spec(tmp_path):
    assert main(["suite", write_problem(tmp_path), "--trials", "5", "--seed", "7"]) == 0


def test_suite_with_alternative_system(tmp_path):
    path = write_problem(tmp_path, phi_alt={"kind": "gaussian", "shift": 0.5})
    out = tmp_path / "suite.json"
    assert main(["suite", path, "--trials", "5", "--out-json", str(out)]) == 0
    checks = json.loads(out.read_text())["invariants"]["checks"]
    assert any(name.startswith("equivalence.") for name in checks)


def test_suite_corrupted_phi_fails_biorthogonality(tmp_path):
    path = write_problem(
        tmp_path, operator={"type": "derivative", "order": 1},
        phi={"kind": "gaussian", "scale": math.sqrt(2 * math.pi)},
    )
    out = tmp_path / "suite.json"
    assert main(["suite", path, "--trials", "3", "--out-json", str(out)]) == 1
    report = json.loads(out.read_text())["invariants"]
    check = report["checks"]["biorthogonality"]
    assert check["pass"] is False
    assert abs(check["value"] - (math.sqrt(2 * math.pi) - 1)) <= 1e-8
    assert abs(report["info"]["gram"][0][0] - math.sqrt(2 * math.pi)) <= 1e-8


def test_suite_zero_trials_exits_2(tmp_path):
    assert main(["suite", write_problem(tmp_path), "--trials", "0"]) == 2


def test_phi_from_samples(tmp_path):
    x = np.linspace(-12, 12, 4801)
    phi = np.exp(-x**2 / 2) / np.sqrt(2 * np.pi)
    np.savetxt(tmp_path / "phi.csv", np.column_stack([x, phi]), delimiter=",", header="x,phi", comments="")
    path = write_problem(tmp_path, operator={"type": "derivative", "order": 1}, phi={"samples": "phi.csv"})
    assert main(["check", path]) == 0


def test_grid_overrides(tmp_path):
    out = tmp_path / "run.json"
    assert main(["--grid-n", "1201", "--grid-t", "10", "check", write_problem(tmp_path), "--out-json", str(out)]) == 0
    grid = json.loads(out.read_text())["provenance"]["grid"]
    assert grid == {"xmin": -10.0, "xmax": 10.0, "n": 1201, "T": 10.0}
    assert main(["--grid-n", "2", "check", write_problem(tmp_path)]) == 2


def test_solve_is_deterministic(tmp_path):
    path = write_problem(tmp_path, operator={"type": "derivative", "order": 2}, space="M",
                         data=[[0, 0], [1, 1], [2, 0], [3, 2]])
    outs = []
    for k in range(2):
        c, j = tmp_path / f"f{k}.csv", tmp_path / f"r{k}.json"
        assert main(["solve", path, "--out-csv", str(c), "--out-json", str(j)]) == 0
        outs.append((c.read_bytes(), j.read_bytes()))
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "nativespace", "check", write_problem(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "PASS biorthogonality" in res.stdout
