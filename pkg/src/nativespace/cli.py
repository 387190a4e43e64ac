"""Command-line front end driven by JSON problem files.

Exit codes: 0 when every check passes, 1 on a domain failure (a check fails or a
solver rejects the problem), 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .biortho import (
    NotBiorthogonalError,
    delta_system,
    gaussian_system,
    hermite_gaussian_system,
    make_biortho_system,
    projector_checks,
)
from .gridfn import GaussianProduct, Grid, GridFunction
from .native import (
    NotAdmissibleError,
    PrimaryNorm,
    identity_suite,
    make_native_space,
    native_norm,
    norm_equivalence_check,
)
from .operator import admissibility_check, apply, make_derivative_operator
from .report import Report
from .solve import (
    DataSet,
    GtvConfig,
    conditional_pd_check,
    solution_function,
    solve_gtv,
    solve_l2,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_PHI_SCHEMA = {
    "oneOf": [
        {"enum": ["hermite-gaussian", "gaussian", "delta"]},
        {
            "type": "object",
            "properties": {
                "kind": {"enum": ["hermite-gaussian", "gaussian", "delta"]},
                "shift": {"type": "number"},
                "scale": {"type": "number"},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"samples": {"type": "string"}},
            "required": ["samples"],
            "additionalProperties": False,
        },
    ]
}

PROBLEM_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "operator": {
            "type": "object",
            "properties": {
                "type": {"const": "derivative"},
                "order": {"type": "integer"},
            },
            "required": ["type", "order"],
            "additionalProperties": False,
        },
        "space": {
            "oneOf": [
                {"enum": ["L2", "M"]},
                {
                    "type": "object",
                    "properties": {"Lp": {"type": "number", "exclusiveMinimum": 1}},
                    "required": ["Lp"],
                    "additionalProperties": False,
                },
            ]
        },
        "phi": _PHI_SCHEMA,
        "phi_alt": _PHI_SCHEMA,
        "data": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "grid": {
            "type": "object",
            "properties": {
                "xmin": {"type": "number"},
                "xmax": {"type": "number"},
                "n": {"type": "integer", "minimum": 3},
            },
            "required": ["xmin", "xmax", "n"],
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "knot_density": {"type": "integer", "minimum": 1},
                "margin": {"type": "number", "minimum": 0},
                "prune_rel": {"type": "number", "minimum": 0},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["version", "operator", "space", "data"],
    "additionalProperties": False,
}


class UsageError(Exception):
    """Malformed input; maps to exit code 2."""


@dataclass
class Problem:
    path: Path
    raw: dict
    grid: Grid
    m: int
    space: PrimaryNorm
    data: DataSet
    tol: float
    seed: int
    gtv: GtvConfig


def load_problem(path: str, grid_n: Optional[int] = None, grid_t: Optional[float] = None,
                 tol: Optional[float] = None) -> Problem:
    """Read and validate a problem file, applying command-line overrides."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read problem file {path}: {exc}") from exc
    try:
        jsonschema.validate(raw, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid problem file: {exc.message}") from exc
    g = raw.get("grid", {"xmin": -12.0, "xmax": 12.0, "n": 4801})
    xmin, xmax, n = g["xmin"], g["xmax"], g["n"]
    if grid_t is not None:
        xmin, xmax = -grid_t, grid_t
    if grid_n is not None:
        n = grid_n
    try:
        grid = Grid(xmin, xmax, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    space = raw["space"]
    primary = PrimaryNorm(space) if isinstance(space, str) else PrimaryNorm("Lp", float(space["Lp"]))
    solver = raw.get("solver", {})
    try:
        data = DataSet.from_points(raw["data"]) if raw["data"] else None
    except ValueError as exc:
        raise UsageError(f"invalid data: {exc}") from exc
    if data is None:
        raise UsageError("data must contain at least one point")
    gtv = GtvConfig(
        knot_density=solver.get("knot_density", 10),
        margin=solver.get("margin"),
        prune_rel=solver.get("prune_rel", 1e-8),
        max_iter=solver.get("max_iter", 50000),
    )
    return Problem(
        path=p, raw=raw, grid=grid, m=int(raw["operator"]["order"]), space=primary, data=data,
        tol=tol if tol is not None else solver.get("tol", 1e-6),
        seed=int(solver.get("seed", 0)), gtv=gtv,
    )


def _read_phi_samples(path: Path, grid: Grid) -> list:
    try:
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read phi samples {path}: {exc}") from exc
    if arr.shape[1] < 2:
        raise UsageError("phi samples need an x column and at least one phi column")
    x = arr[:, 0]
    return [GridFunction(grid, np.interp(grid.x, x, arr[:, k], left=0.0, right=0.0))
            for k in range(1, arr.shape[1])]


def build_system(spec_phi, problem: Problem):
    """Biorthogonal system described by a ``phi`` entry."""
    grid, m, tol = problem.grid, problem.m, problem.tol
    if spec_phi is None:
        spec_phi = "hermite-gaussian"
    if isinstance(spec_phi, dict) and "samples" in spec_phi:
        path = Path(spec_phi["samples"])
        if not path.is_absolute():
            path = problem.path.parent / path
        phis = _read_phi_samples(path, grid)
        ps = [GridFunction.polynomial(grid, (0.0,) * k + (1.0,)) for k in range(len(phis))]
        return make_biortho_system(phis, ps, tol=tol, alpha=float(m - 1))
    kind = spec_phi if isinstance(spec_phi, str) else spec_phi["kind"]
    shift = 0.0 if isinstance(spec_phi, str) else float(spec_phi.get("shift", 0.0))
    scale = 1.0 if isinstance(spec_phi, str) else float(spec_phi.get("scale", 1.0))
    if kind == "delta":
        if shift != 0.0:
            raise UsageError("delta functionals are anchored at 0")
        sysm = delta_system(grid, m, tol=tol)
    elif kind == "gaussian":
        sysm = gaussian_system(grid, m, shift, tol=tol)
    else:
        sysm = hermite_gaussian_system(grid, m, shift, tol=tol)
    if scale != 1.0:
        return make_biortho_system([scale * f for f in sysm.phis], sysm.ps, tol=tol, alpha=sysm.alpha)
    return sysm


def _operator(problem: Problem):
    try:
        return make_derivative_operator(problem.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _default_bank(grid: Grid) -> list:
    return [GridFunction.from_form(grid, GaussianProduct((1.0,), c, s))
            for c, s in ((-1.0, 1.0), (0.0, 0.7), (1.5, 1.3))]


def _pd_points(problem: Problem, n0: int) -> np.ndarray:
    x = problem.data.x
    if x.size >= n0 + 1:
        return x
    return np.linspace(-1.0, 1.0, n0 + 2)


def _provenance(problem: Problem, command: str, **extra) -> dict:
    g = problem.grid
    out = {
        "command": command,
        "version": __version__,
        "problem": problem.path.name,
        "grid": {"xmin": g.x_min, "xmax": g.x_max, "n": g.n, "T": g.half_width},
        "tol": problem.tol,
        "seed": problem.seed,
    }
    out.update(extra)
    return out


def _system_or_failure(spec_phi, problem: Problem, report: Report, label: str):
    try:
        return build_system(spec_phi, problem)
    except NotBiorthogonalError as exc:
        dev = float(np.max(np.abs(exc.gram - np.eye(exc.gram.shape[0]))))
        report.add(f"{label}biorthogonality", dev, problem.tol)
        report.info[f"{label}gram"] = exc.gram.tolist()
        return None


def _emit(result: dict, out_json: Optional[str]) -> None:
    text = json.dumps(result, indent=2, sort_keys=True)
    if out_json:
        Path(out_json).write_text(text + "\n")


def _print_report(report: Report) -> None:
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.value:.6g} {c.relation} {c.threshold:.6g}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check(problem: Problem, out_json: Optional[str] = None) -> tuple:
    """Admissibility, biorthogonality, norm compatibility and conditional positivity."""
    op = _operator(problem)
    report = Report("check")
    report.extend(admissibility_check(op, _default_bank(problem.grid), tol=problem.tol), "admissibility.")
    sysm = _system_or_failure(problem.raw.get("phi"), problem, report, "")
    messages = []
    if sysm is not None:
        report.add("biorthogonality", float(np.max(np.abs(sysm.gram - np.eye(sysm.n0)))), problem.tol)
        try:
            make_native_space(op, sysm, problem.space)
            report.add("norm_compatibility", 0.0, 0.0)
        except NotAdmissibleError as exc:
            messages.append(str(exc))
            report.add("norm_compatibility", 1.0, 0.0)
    report.extend(conditional_pd_check(op, _pd_points(problem, op.n0), 1000, problem.seed), "posdef.")
    result = {
        "provenance": _provenance(problem, "check"),
        "invariants": report.to_dict(),
        "messages": messages,
    }
    _emit(result, out_json)
    _print_report(report)
    for msg in messages:
        print(msg)
    return result, 0 if report.passed else 1


def _fmt(v: float) -> str:
    return repr(float(v))


def cmd_solve(problem: Problem, out_csv: Optional[str] = None, out_json: Optional[str] = None) -> tuple:
    """Solve the interpolation problem and write samples and a report."""
    op = _operator(problem)
    sysm = build_system(problem.raw.get("phi"), problem)
    spec = make_native_space(op, sysm, problem.space)
    kind = problem.space.kind
    if kind == "M":
        sol = solve_gtv(op, problem.data, cfg=problem.gtv)
    elif kind == "L2" or (kind == "Lp" and problem.space.p == 2.0):
        sol = solve_l2(op, problem.data)
    else:
        raise ValueError(f"no solver for primary norm Lp with p = {problem.space.p:g}")
    f = solution_function(sol, op, problem.grid)
    lf = apply(op, f)
    nv = native_norm(spec, f, check_membership=False)
    report = Report("solve")
    scale = max(1.0, float(np.max(np.abs(problem.data.y))))
    report.add("interpolation_residual", sol.residual, 1e-8 * scale)
    if sol.kind == "SparseSpline":
        report.add("knot_count", len(sol.knots), problem.data.size - op.n0)
    else:
        report.add("side_condition", sol.info["side_residual"], 1e-8 * scale)
    result = {
        "provenance": _provenance(problem, "solve"),
        "solution": sol.to_dict(),
        "norms": {"native": nv.value, "Lf": nv.lf_norm, "null_space": nv.null_norm,
                  "primary": kind if kind != "Lp" else f"L{problem.space.p:g}"},
        "invariants": report.to_dict(),
    }
    if out_csv:
        with open(out_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "f", "Lf"])
            for x, fx, lx in zip(problem.grid.x, f.samples, lf.samples):
                w.writerow([_fmt(x), _fmt(fx), _fmt(lx)])
    _emit(result, out_json)
    print(f"objective {sol.objective!r}")
    print(f"residual {sol.residual!r}")
    print("knot,weight")
    for t, a in zip(sol.knots, sol.weights):
        print(f"{float(t)!r},{float(a)!r}")
    return result, 0 if report.passed else 1


def cmd_suite(problem: Problem, trials: int, seed: int, out_json: Optional[str] = None) -> tuple:
    """Identity suite, projector algebra, conditional positivity and, optionally, norm equivalence."""
    if trials < 1:
        raise UsageError("trials must be at least 1")
    op = _operator(problem)
    report = Report("suite")
    sysm = _system_or_failure(problem.raw.get("phi"), problem, report, "")
    if sysm is not None:
        report.add("biorthogonality", float(np.max(np.abs(sysm.gram - np.eye(sysm.n0)))), problem.tol)
        spec = make_native_space(op, sysm, problem.space)
        report.extend(identity_suite(spec, trials, seed), "identities.")
        report.extend(projector_checks(sysm, trials, seed), "projectors.")
        if "phi_alt" in problem.raw:
            alt = _system_or_failure(problem.raw["phi_alt"], problem, report, "alt.")
            if alt is not None:
                eq, _, _ = norm_equivalence_check(spec, alt.phis, trials, seed)
                report.extend(eq, "equivalence.")
    report.extend(conditional_pd_check(op, _pd_points(problem, op.n0), 1000, seed), "posdef.")
    result = {
        "provenance": _provenance(problem, "suite", trials=trials, suite_seed=seed),
        "invariants": report.to_dict(),
    }
    _emit(result, out_json)
    _print_report(report)
    return result, 0 if report.passed else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nativespace", description=__doc__.splitlines()[0])
    parser.add_argument("--grid-n", type=int, help="override the number of grid nodes")
    parser.add_argument("--grid-t", type=float, help="override the grid to [-T, T]")
    parser.add_argument("--tol", type=float, help="override the biorthogonality/check tolerance")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="admissibility and compatibility checks")
    p.add_argument("problem")
    p.add_argument("--out-json")
    p = sub.add_parser("solve", help="solve the interpolation problem")
    p.add_argument("problem")
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p = sub.add_parser("suite", help="randomized invariant suite")
    p.add_argument("problem")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.grid_n is not None and args.grid_n < 3:
            raise UsageError("--grid-n must be at least 3")
        if args.grid_t is not None and not (args.grid_t > 0 and math.isfinite(args.grid_t)):
            raise UsageError("--grid-t must be positive")
        problem = load_problem(args.problem, args.grid_n, args.grid_t, args.tol)
        if args.command == "check":
            _, code = cmd_check(problem, args.out_json)
        elif args.command == "solve":
            _, code = cmd_solve(problem, args.out_csv, args.out_json)
        else:
            _, code = cmd_suite(problem, args.trials, args.seed, args.out_json)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
