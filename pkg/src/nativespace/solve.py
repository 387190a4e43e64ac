"""Variational interpolation solvers.

``solve_l2`` minimises ``||Lf||_2`` subject to ``f(x_m) = y_m`` through the
polyharmonic kernel ``h = (L* L)^{-1} delta``. ``solve_gtv`` minimises the total
variation ``||Lf||_M`` over L-splines with knots on a candidate grid and returns
a sparse solution with at most ``M - N0`` knots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .gridfn import GreenAtom, Grid, GridFunction, Polynomial, Sum, rho
from .operator import OperatorDescriptor
from .report import Report

__all__ = [
    "DataSet",
    "Solution",
    "GtvConfig",
    "UnderdeterminedError",
    "SingularSystemError",
    "SolverError",
    "kernel_h",
    "solve_l2",
    "solve_gtv",
    "conditional_pd_check",
    "constrained_quadratic_form",
    "evaluate_solution",
    "solution_function",
]


class UnderdeterminedError(ValueError):
    """Fewer data points than the null-space dimension."""


class SingularSystemError(ValueError):
    """The interpolation system cannot be solved."""


class SolverError(RuntimeError):
    """The optimisation back end failed or did not converge."""


@dataclass(frozen=True, eq=False)
class DataSet:
    """Point samples ``(x_m, y_m)`` with strictly increasing ``x``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        if x.size == 0:
            raise ValueError("data set is empty")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("data must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("data sites must be strictly increasing")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "DataSet":
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("points must be a list of (x, y) pairs")
        return cls(arr[:, 0], arr[:, 1])

    @property
    def size(self) -> int:
        return self.x.size

    def shifted(self, dy: np.ndarray) -> "DataSet":
        return DataSet(self.x, self.y + np.asarray(dy, dtype=float))


@dataclass(frozen=True, eq=False)
class Solution:
    """``f = sum_k weights[k] atom(., knots[k]) + sum_n null_coeffs[n] p_n``.

    ``kind`` is ``"Kernel"`` (atom = ``kernel_h``) or ``"SparseSpline"``
    (atom = Green's function of ``L``).
    """

    kind: str
    m: int
    knots: np.ndarray
    weights: np.ndarray
    null_coeffs: np.ndarray
    objective: float
    residual: float
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "knots": [float(t) for t in self.knots],
            "weights": [float(a) for a in self.weights],
            "null_coeffs": [float(b) for b in self.null_coeffs],
            "objective": float(self.objective),
            "residual": float(self.residual),
        }


@dataclass(frozen=True)
class GtvConfig:
    """Settings for :func:`solve_gtv`.

    Attributes
    ----------
    knot_density : int
        Candidate knots per data point on the uniform part of the dictionary.
    margin : float or None
        Extension of the candidate range beyond the data; defaults to one
        candidate spacing.
    prune_rel : float
        Weights with ``|a| <= prune_rel * max|a|`` are dropped.
    merge_factor : float
        Surviving knots closer than ``merge_factor`` candidate spacings merge.
    max_iter : int
        Iteration cap of the LP solver.
    """

    knot_density: int = 10
    margin: Optional[float] = None
    prune_rel: float = 1e-8
    merge_factor: float = 2.0
    max_iter: int = 50000


# ---------------------------------------------------------------------------
# Kernels and matrices
# ---------------------------------------------------------------------------


def kernel_h(op: OperatorDescriptor, x, y):
    """``(-1)**m |x - y|**(2m-1) / (2 (2m-1)!)``, the Green's function of ``L* L``."""
    m = op.m
    r = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    out = (-1.0) ** m * r ** (2 * m - 1) / (2.0 * math.factorial(2 * m - 1))
    return out if np.ndim(out) else float(out)


def _null_matrix(op: OperatorDescriptor, x: np.ndarray) -> np.ndarray:
    return np.column_stack([p(x) for p in op.null_basis])


def _kernel_matrix(op: OperatorDescriptor, x: np.ndarray) -> np.ndarray:
    return kernel_h(op, x[:, None], x[None, :])


def _complement(P: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(P)``."""
    Q, _ = np.linalg.qr(P, mode="complete")
    return Q[:, P.shape[1]:]


def _require_enough(op: OperatorDescriptor, data: DataSet) -> None:
    if data.size < op.n0:
        raise UnderdeterminedError(
            f"underdetermined null space: {data.size} data points for null-space dimension {op.n0}"
        )


# ---------------------------------------------------------------------------
# L2 solver
# ---------------------------------------------------------------------------


def solve_l2(op: OperatorDescriptor, data: DataSet, tol: float = 1e-8) -> Solution:
    """Minimum ``||Lf||_2`` interpolant from the saddle-point system.

    Solves ``[G P; P^T 0] [a; b] = [y; 0]`` with ``G = h(x_i, x_j)`` and
    ``P = p_n(x_i)``. The objective is ``a^T G a``.
    """
    _require_enough(op, data)
    x, y = data.x, data.y
    G = _kernel_matrix(op, x)
    P = _null_matrix(op, x)
    M, N = P.shape
    K = np.zeros((M + N, M + N))
    K[:M, :M] = G
    K[:M, M:] = P
    K[M:, :M] = P.T
    rhs = np.concatenate([y, np.zeros(N)])
    if np.linalg.matrix_rank(P) < N:
        raise SingularSystemError("data sites do not determine the null-space component")
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"interpolation system is singular: {exc}") from exc
    a, b = sol[:M], sol[M:]
    residual = float(np.max(np.abs(G @ a + P @ b - y)))
    side = float(np.max(np.abs(P.T @ a))) if M else 0.0
    scale = max(1.0, float(np.max(np.abs(y))))
    if residual > tol * scale * 1e2 or side > tol * scale * 1e2:
        raise SingularSystemError(f"ill-conditioned system: residual {residual:.3e}")
    objective = float(a @ G @ a)
    return Solution(
        "Kernel", op.m, x.copy(), a, b, objective, residual,
        {"side_residual": side, "condition": float(np.linalg.cond(K))},
    )


# ---------------------------------------------------------------------------
# gTV solver
# ---------------------------------------------------------------------------


def _candidates(data: DataSet, knot_grid: Optional[Grid], cfg: GtvConfig) -> np.ndarray:
    x = data.x
    if knot_grid is None:
        count = max(cfg.knot_density * data.size, 2)
        span = x[-1] - x[0] if data.size > 1 else 1.0
        margin = span / (count - 1) if cfg.margin is None else cfg.margin
        uniform = np.linspace(x[0] - margin, x[-1] + margin, count)
    else:
        if knot_grid.x_min > x[0] or knot_grid.x_max < x[-1]:
            raise ValueError("knot grid must span the data sites")
        uniform = knot_grid.x
    # midpoints guarantee a knot strictly between every pair of data sites
    mids = 0.5 * (x[1:] + x[:-1])
    return np.unique(np.concatenate([uniform, x, mids]))


def _lp_min_l1(A: np.ndarray, b: np.ndarray, max_iter: int) -> np.ndarray:
    """``min ||a||_1`` subject to ``A a = b`` as a vertex solution of an LP."""
    k = A.shape[1]
    res = linprog(
        np.ones(2 * k),
        A_eq=np.hstack([A, -A]),
        b_eq=b,
        bounds=(0, None),
        method="highs-ds",
        options={"maxiter": int(max_iter), "presolve": True},
    )
    if res.status == 1:
        raise SolverError("LP solver hit its iteration cap")
    if res.status != 0:
        raise SolverError(f"internal error: LP solver failed ({res.message})")
    return res.x[:k] - res.x[k:]


def _merge(knots: np.ndarray, weights: np.ndarray, min_gap: float):
    out_t, out_a = [], []
    i = 0
    while i < len(knots):
        j = i
        while j + 1 < len(knots) and knots[j + 1] - knots[j] < min_gap:
            j += 1
        w = weights[i : j + 1]
        if j > i:
            t = float(np.sum(np.abs(w) * knots[i : j + 1]) / np.sum(np.abs(w)))
        else:
            t = float(knots[i])
        out_t.append(t)
        out_a.append(float(np.sum(w)))
        i = j + 1
    return np.array(out_t), np.array(out_a)


def solve_gtv(
    op: OperatorDescriptor,
    data: DataSet,
    knot_grid: Optional[Grid] = None,
    cfg: GtvConfig = GtvConfig(),
) -> Solution:
    """Sparse L-spline interpolant minimising ``sum_k |a_k| = ||Lf||_M``.

    The null-space component is eliminated with an orthonormal complement ``Q``
    of ``range(P)``, leaving ``min ||a||_1`` subject to ``Q^T A a = Q^T y``. That
    system has ``M - N0`` rows, so a vertex solution has at most ``M - N0``
    knots. The null-space coefficients are then recovered by least squares.
    """
    _require_enough(op, data)
    x, y = data.x, data.y
    P = _null_matrix(op, x)
    if np.linalg.matrix_rank(P) < op.n0:
        raise SingularSystemError("data sites do not determine the null-space component")
    cand = _candidates(data, knot_grid, cfg)
    if cand.size < data.size:
        raise ValueError("candidate knot count must be at least the number of data points")
    A = rho(op.m, x[:, None] - cand[None, :])
    Q = _complement(P)
    if Q.shape[1] == 0:
        a = np.zeros(cand.size)
    else:
        a = _lp_min_l1(Q.T @ A, Q.T @ y, cfg.max_iter)
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    keep = np.abs(a) > cfg.prune_rel * amax if amax > 0 else np.zeros(a.size, dtype=bool)
    spacing = float(np.min(np.diff(cand))) if cand.size > 1 else 1.0
    if cand.size > 1 and knot_grid is None:
        spacing = float((cand[-1] - cand[0]) / max(cfg.knot_density * data.size - 1, 1))
    knots, weights = cand[keep], a[keep]
    scale = max(1.0, float(np.max(np.abs(y))))
    merged = False
    mk, mw = _merge(knots, weights, cfg.merge_factor * spacing)
    if mk.size < knots.size:
        # Refit on the merged knots; keep the merge only if it still interpolates.
        Ak = rho(op.m, x[:, None] - mk[None, :])
        sol, *_ = np.linalg.lstsq(np.hstack([Ak, P]), y, rcond=None)
        if np.max(np.abs(np.hstack([Ak, P]) @ sol - y)) <= 1e-9 * scale:
            knots, weights, merged = mk, sol[: mk.size], True
    Ak = rho(op.m, x[:, None] - knots[None, :]) if knots.size else np.zeros((data.size, 0))
    b, *_ = np.linalg.lstsq(P, y - Ak @ weights, rcond=None)
    residual = float(np.max(np.abs(Ak @ weights + P @ b - y)))
    return Solution(
        "SparseSpline", op.m, knots, weights, b, float(np.sum(np.abs(weights))), residual,
        {"candidates": int(cand.size), "merged": bool(merged), "knot_bound": data.size - op.n0},
    )


# ---------------------------------------------------------------------------
# Conditional positive definiteness
# ---------------------------------------------------------------------------


def constrained_quadratic_form(op: OperatorDescriptor, points: Sequence[float], a: Sequence[float]) -> float:
    """``a^T H a`` with ``H = h(x_i, x_j)`` for a nonzero ``a`` with ``P^T a = 0``."""
    x = np.asarray(points, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.shape != x.shape:
        raise ValueError("coefficient vector must match the number of points")
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    P = _null_matrix(op, x)
    if np.max(np.abs(P.T @ a)) > 1e-10 * max(1.0, float(np.max(np.abs(P)))) * np.linalg.norm(a):
        raise ValueError("coefficient vector does not annihilate the null space")
    return float(a @ _kernel_matrix(op, x) @ a)


def conditional_pd_check(
    op: OperatorDescriptor, points: Sequence[float], trials: int = 1000, seed: int = 0
) -> Report:
    """Sample ``a^T H a`` over random unit vectors with ``P^T a = 0``; pass iff the minimum is positive."""
    x = np.asarray(points, dtype=float)
    if np.unique(x).size != x.size:
        raise ValueError("points must be distinct")
    if x.size < op.n0 + 1:
        raise ValueError(f"need at least {op.n0 + 1} distinct points")
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    H = _kernel_matrix(op, x)
    P = _null_matrix(op, x)
    Q = _complement(P)
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(Q.shape[1], int(trials)))
    A = Q @ (Z / np.linalg.norm(Z, axis=0))
    forms = np.einsum("ij,ik,kj->j", A, H, A)
    report = Report("conditional_pd")
    report.add("min_constrained_form", float(np.min(forms)), 0.0, ">")
    report.add("symmetry", float(np.max(np.abs(H - H.T))), 0.0)
    report.info["min_eigenvalue"] = float(np.min(np.linalg.eigvalsh(Q.T @ H @ Q)))
    return report


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate_solution(sol: Solution, op: OperatorDescriptor, xs) -> np.ndarray:
    """``f(xs)`` for a solver output."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    for t, a in zip(sol.knots, sol.weights):
        if sol.kind == "Kernel":
            out = out + a * kernel_h(op, xs, t)
        else:
            out = out + a * rho(op.m, xs - t)
    for b, p in zip(sol.null_coeffs, op.null_basis):
        out = out + b * p(xs)
    return out


def solution_function(sol: Solution, op: OperatorDescriptor, grid: Grid) -> GridFunction:
    """The solution as a closed-form :class:`GridFunction`.

    Kernel atoms are Green atoms of order ``2m`` with sign ``(-1)**m``, so
    applying ``L`` to the result is exact.
    """
    terms = []
    sign = (-1.0) ** op.m
    for t, a in zip(sol.knots, sol.weights):
        if sol.kind == "Kernel":
            terms.append(GreenAtom(2 * op.m, float(t), sign * float(a)))
        else:
            terms.append(GreenAtom(op.m, float(t), float(a)))
    poly = Polynomial(())
    for b, p in zip(sol.null_coeffs, op.null_basis):
        poly = poly + p.scaled(float(b))
    terms.append(poly)
    return GridFunction.from_form(grid, Sum(tuple(terms)))
