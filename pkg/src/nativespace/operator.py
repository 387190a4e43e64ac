"""Derivative operators ``L = D**m`` with their Green's functions and inverses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .gridfn import (
    DeltaAtom,
    Grid,
    GreenAtom,
    GridFunction,
    Polynomial,
    Sum,
    _local_interp,
    _terms,
    fd_derivative,
    form_derivative,
    growth_exponent,
    interior_mask,
    rho,
    weighted_l1_norm,
    weighted_sup_norm,
)
from .report import Report

__all__ = [
    "OperatorDescriptor",
    "UnsupportedFormError",
    "make_derivative_operator",
    "green",
    "apply",
    "apply_adjoint",
    "anti_derivative_delta",
    "canonical_inverse",
    "canonical_inverse_adjoint",
    "green_convolve",
    "admissibility_check",
    "MAX_ORDER",
]

MAX_ORDER = 4


class UnsupportedFormError(ValueError):
    """Raised when an input has a form the requested operation cannot handle."""


@dataclass(frozen=True)
class OperatorDescriptor:
    """The operator ``D**m`` with growth order ``alpha`` and a null-space basis."""

    m: int
    alpha: float
    null_basis: tuple = field(default=())

    def __post_init__(self):
        if len(self.null_basis) != self.m:
            raise ValueError("null_basis must have exactly m elements")
        for p in self.null_basis:
            if not isinstance(p, Polynomial):
                raise TypeError("null_basis entries must be Polynomial forms")

    @property
    def n0(self) -> int:
        return self.m

    @property
    def adjoint_sign(self) -> float:
        return -1.0 if self.m % 2 else 1.0

    def null_functions(self, grid: Grid) -> list[GridFunction]:
        return [GridFunction.from_form(grid, p) for p in self.null_basis]

    def green(self, x):
        return rho(self.m, x)


def make_derivative_operator(m: int) -> OperatorDescriptor:
    """``D**m`` with ``alpha = m-1`` and monomial null basis ``1, x, ..., x**(m-1)``."""
    if int(m) != m or not 1 <= m <= MAX_ORDER:
        raise ValueError(f"derivative order must be in 1..{MAX_ORDER}, got {m}")
    m = int(m)
    return OperatorDescriptor(m, float(m - 1), tuple(Polynomial.monomial(k) for k in range(m)))


def _order(op: Union[OperatorDescriptor, int]) -> int:
    return op.m if isinstance(op, OperatorDescriptor) else int(op)


def green(op: Union[OperatorDescriptor, int], x):
    """Green's function ``sign(x) x**(m-1) / (2 (m-1)!)``."""
    return rho(_order(op), x)


# ---------------------------------------------------------------------------
# Forward action
# ---------------------------------------------------------------------------


def _derivative(f: GridFunction, k: int) -> GridFunction:
    atoms = tuple(DeltaAtom(a.center, a.weight, a.order + k) for a in f.atoms)
    if f.form is not None:
        form, new_atoms = form_derivative(f.form, k)
        return GridFunction(f.grid, form(f.grid.x), form, new_atoms + atoms)
    d = fd_derivative(f.regular(), k)
    return GridFunction(f.grid, d.samples, d.form, atoms)


def apply(op: OperatorDescriptor, f: GridFunction) -> GridFunction:
    """``D**m f``; closed forms analytically, sampled functions by finite differences."""
    return _derivative(f, op.m)


def apply_adjoint(op: OperatorDescriptor, g: GridFunction) -> GridFunction:
    """``(-1)**m D**m g``."""
    return _derivative(g, op.m) * op.adjoint_sign


# ---------------------------------------------------------------------------
# Inverses
# ---------------------------------------------------------------------------

_GREGORY = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])
_SPLIT = np.array([-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0])


def green_convolve(samples: np.ndarray, dx: float, m: int) -> np.ndarray:
    """``(rho_m * w)(x_i)`` at every node by fourth-order composite quadrature.

    The integrand has a kink at ``y = x_i``, so the integral is split there and
    each half gets end corrections of Gregory type.
    """
    w = np.asarray(samples, dtype=float)
    n = w.shape[0]
    gw = np.ones(n)
    if n >= 6:
        gw[:3] = _GREGORY
        gw[-3:] = _GREGORY[::-1]
    else:
        gw[0] = gw[-1] = 0.5
    out = kernels.green_sums(dx * gw * w, dx, m)
    if n >= 12:
        r1, r2 = rho(m, dx), rho(m, 2 * dx)
        s = -1.0 if m % 2 else 1.0
        i = np.arange(5, n - 5)
        corr = (
            _SPLIT[1] * (r1 * w[i - 1] + s * r1 * w[i + 1])
            + _SPLIT[2] * (r2 * w[i - 2] + s * r2 * w[i + 2])
        )
        out[i] += dx * corr
    return out


def _atoms_to_green(op_m: int, atoms: Sequence[DeltaAtom]) -> list:
    terms = []
    for a in atoms:
        if a.order >= op_m:
            raise UnsupportedFormError(
                f"inverse of a delta derivative of order {a.order} is singular for m={op_m}"
            )
        terms.append(GreenAtom(op_m - a.order, a.center, a.weight))
    return terms


def canonical_inverse(op: OperatorDescriptor, w: GridFunction) -> GridFunction:
    """``rho_L * w``: Green atoms for Dirac atoms, direct quadrature for samples."""
    if not isinstance(w, GridFunction):
        raise UnsupportedFormError("canonical_inverse expects a GridFunction")
    terms = _atoms_to_green(op.m, w.atoms)
    grid = w.grid
    regular_zero = not np.any(w.samples)
    if regular_zero:
        form = Sum(tuple(terms)) if len(terms) > 1 else (terms[0] if terms else Polynomial(()))
        return GridFunction.from_form(grid, form)
    samples = green_convolve(w.samples, grid.dx, op.m)
    if terms:
        samples = samples + Sum(tuple(terms))(grid.x)
    return GridFunction(grid, samples)


def canonical_inverse_adjoint(op: OperatorDescriptor, g: GridFunction) -> GridFunction:
    """Adjoint inverse ``rho_L(-.) * g``, equal to ``(-1)**m rho_L * g``."""
    return canonical_inverse(op, g) * op.adjoint_sign


def _cumulative(y: np.ndarray, grid: Grid) -> np.ndarray:
    """Antiderivative vanishing at 0 via end-corrected cumulative trapezoid."""
    dx = grid.dx
    csum = np.concatenate(([0.0], np.cumsum(0.5 * dx * (y[1:] + y[:-1]))))
    dy = fd_derivative(GridFunction(grid, y), 1).samples
    csum = csum - dx * dx / 12.0 * (dy - dy[0])
    return csum - _local_interp(grid, csum, 0.0)


def anti_derivative_delta(f: GridFunction, iterations: int = 1) -> GridFunction:
    """Iterated antiderivative ``x -> int_0^x f``, each stage vanishing at 0."""
    if int(iterations) != iterations or iterations < 1:
        raise ValueError("iterations must be a positive integer")
    if f.atoms:
        raise UnsupportedFormError("anti_derivative_delta requires a sampled function")
    grid = f.grid
    if not grid.contains(0.0):
        raise ValueError("grid must contain 0")
    if f.form is not None and all(isinstance(t, Polynomial) for t in _terms(f.form)):
        coeffs = np.zeros(1)
        for t in _terms(f.form):
            coeffs = np.polynomial.polynomial.polyadd(coeffs, t.coeffs or (0.0,))
        for _ in range(int(iterations)):
            coeffs = np.polynomial.polynomial.polyint(coeffs)
        return GridFunction.polynomial(grid, coeffs)
    y = f.samples
    for _ in range(int(iterations)):
        y = _cumulative(y, grid)
    return GridFunction(grid, y)


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


def admissibility_check(
    op: OperatorDescriptor,
    bank: Sequence[GridFunction],
    tol: float = 1e-6,
    growth_slack: float = 0.1,
) -> Report:
    """Numerical spot-check that ``op`` is spline-admissible.

    Checks (a) that each null-space basis element is annihilated, (b) that the
    canonical inverse undoes ``L`` and ``L*`` on the bank, and (c) that the Green's
    function and null basis grow no faster than ``(1+|x|)**alpha``.
    """
    bank = list(bank)
    if not bank:
        raise ValueError("admissibility bank must be nonempty")
    grid = bank[0].grid
    mask = interior_mask(grid, 5 * op.m)
    report = Report("admissibility")

    null_res = 0.0
    for p in op.null_functions(grid):
        lp = apply(op, p)
        if lp.atoms:
            null_res = float("inf")
        else:
            null_res = max(null_res, float(np.max(np.abs(lp.samples[mask]))))
    report.add("null_space_annihilation", null_res, 1e-8)

    # Residuals are measured in the weighted sup-norm of the target space
    # L_inf,alpha; the plain sup-norm is reported alongside as info.
    weight = (1.0 + np.abs(grid.x[mask])) ** (-op.alpha)
    left, left_adj, plain, worst_ratio = 0.0, 0.0, 0.0, 0.0
    for phi in bank:
        lphi = apply(op, phi)
        back = canonical_inverse(op, lphi)
        err = np.abs(back.samples - phi.samples)[mask]
        left = max(left, float(np.max(weight * err)))
        plain = max(plain, float(np.max(err)))
        lsphi = apply_adjoint(op, phi)
        back_adj = canonical_inverse_adjoint(op, lsphi)
        err = np.abs(back_adj.samples - phi.samples)[mask]
        left_adj = max(left_adj, float(np.max(weight * err)))
        plain = max(plain, float(np.max(err)))
        denom = weighted_l1_norm(lphi, -op.alpha) if not lphi.atoms else 0.0
        if denom > 0:
            worst_ratio = max(worst_ratio, weighted_sup_norm(back, op.alpha) / denom)
    report.add("inverse_of_L", left, tol)
    report.add("inverse_of_L_adjoint", left_adj, tol)
    report.info["inverse_plain_sup_residual"] = plain
    report.info["bank_worst_continuity_ratio"] = worst_ratio

    g = GridFunction.green_atom(grid, op.m, 0.0)
    gexp = growth_exponent(g)
    report.add("green_growth_exponent", gexp, op.alpha + growth_slack)
    pexp = max(growth_exponent(p) for p in op.null_functions(grid))
    report.add("null_basis_growth_exponent", pexp, op.alpha + growth_slack)
    report.info["T"] = grid.half_width
    return report

