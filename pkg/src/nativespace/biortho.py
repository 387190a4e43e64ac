"""Biorthogonal systems for the null space and the associated projectors.

A system pairs analysis functionals ``phi_1..phi_N`` with a null-space basis
``p_1..p_N`` such that ``<phi_m, p_n> = delta_mn``. It fixes the boundary
conditions of the stabilized pseudo-inverses in :mod:`nativespace.native`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import hermite_e, polynomial as npoly

from .gridfn import (
    GaussianProduct,
    Grid,
    GridFunction,
    Polynomial,
    _terms,
    has_finite_weighted_l1,
    inner,
    weighted_sup_norm,
)
from .report import Report
from .testfunctions import random_mixture, random_null_polynomial

__all__ = [
    "BiorthoSystem",
    "ChangeOfBasis",
    "NotBiorthogonalError",
    "DivergentMomentError",
    "make_biortho_system",
    "hermite_gaussian_system",
    "gaussian_system",
    "delta_system",
    "proj_np",
    "proj_nphi",
    "nullspace_norm",
    "change_of_basis",
    "projector_bound",
    "combine",
    "projector_checks",
]

DEFAULT_TOL = 1e-6
MAX_CONDITION = 1e8


class NotBiorthogonalError(ValueError):
    """Raised when the Gram matrix deviates from the identity; carries it as ``gram``."""

    def __init__(self, message: str, gram: np.ndarray):
        super().__init__(message)
        self.gram = gram


class DivergentMomentError(ValueError):
    """Raised when a function decays too slowly to pair with the null-space basis."""


def _poly_of(p: GridFunction) -> Polynomial:
    if p.atoms or p.form is None or not all(isinstance(t, Polynomial) for t in _terms(p.form)):
        raise TypeError("null-space basis elements must carry a Polynomial form")
    out = Polynomial(())
    for t in _terms(p.form):
        out = out + t
    return out


def combine(coeffs: Sequence[float], funcs: Sequence[GridFunction]) -> GridFunction:
    """``sum_k coeffs[k] * funcs[k]`` preserving closed forms where possible."""
    out = funcs[0].grid.zeros()
    for c, f in zip(coeffs, funcs):
        if c != 0.0:
            out = out + float(c) * f
    return out


@dataclass(frozen=True, eq=False)
class BiorthoSystem:
    """Biorthogonal pair ``(phis, ps)`` with its measured Gram matrix."""

    phis: tuple
    ps: tuple
    gram: np.ndarray
    alpha: float

    @property
    def n0(self) -> int:
        return len(self.ps)

    @property
    def grid(self) -> Grid:
        return self.ps[0].grid

    @property
    def has_atoms(self) -> bool:
        return any(phi.atoms for phi in self.phis)

    def coefficients(self, f: GridFunction) -> np.ndarray:
        """``phi(f) = (<phi_n, f>)_n``."""
        return np.array([inner(phi, f) for phi in self.phis])

    def moments(self, g: GridFunction) -> np.ndarray:
        """``p(g) = (<p_n, g>)_n``."""
        return np.array([inner(p, g) for p in self.ps])

    def polynomials(self) -> list:
        return [_poly_of(p) for p in self.ps]


@dataclass(frozen=True, eq=False)
class ChangeOfBasis:
    """Matrices and norm-equivalence constants relating two systems.

    ``C[m, n] = <phi~_m, p_n>`` and ``B = C^{-1}``. ``B1 = 1/||B||_F`` and
    ``B2 = ||C||_F`` bound ``||phi~(p)|| / ||phi(p)||`` on the null space.
    ``A1`` and ``A2`` bound the ratio of native norms; they are ``None`` when no
    pre-dual norm was supplied.
    """

    C: np.ndarray
    B: np.ndarray
    B1: float
    B2: float
    A1: Optional[float] = None
    A2: Optional[float] = None


def make_biortho_system(
    phis: Sequence[GridFunction],
    ps: Sequence[GridFunction],
    tol: float = DEFAULT_TOL,
    alpha: Optional[float] = None,
) -> BiorthoSystem:
    """Validate a candidate system by computing its Gram matrix.

    Parameters
    ----------
    phis, ps : sequences of GridFunction
        Analysis functionals and polynomial null-space basis, of equal length.
    tol : float
        Largest accepted entry of ``|gram - I|``.
    alpha : float, optional
        Growth order used for the integrability probe of the ``phis``. Defaults
        to the largest polynomial degree among ``ps``.
    """
    phis, ps = tuple(phis), tuple(ps)
    if len(phis) != len(ps):
        raise ValueError(f"length mismatch: {len(phis)} functionals vs {len(ps)} basis functions")
    if not ps:
        raise ValueError("a biorthogonal system needs at least one element")
    polys = [_poly_of(p) for p in ps]
    if alpha is None:
        alpha = float(max(max(p.degree, 0) for p in polys))
    for k, phi in enumerate(phis):
        if np.any(phi.samples) and not has_finite_weighted_l1(phi.regular(), alpha):
            raise DivergentMomentError(f"phi_{k + 1} is not integrable against growth order {alpha}")
    gram = np.array([[inner(phi, p) for p in ps] for phi in phis])
    dev = float(np.max(np.abs(gram - np.eye(len(ps)))))
    if not dev <= tol:
        raise NotBiorthogonalError(
            f"not biorthogonal: max |gram - I| = {dev:.3e} exceeds {tol:.1e}", gram
        )
    return BiorthoSystem(phis, ps, gram, float(alpha))


# ---------------------------------------------------------------------------
# Stock systems
# ---------------------------------------------------------------------------


def _shift_coeffs(coeffs, shift: float) -> tuple:
    """Coefficients in ``x`` of ``q(x - shift)``."""
    q = npoly.Polynomial(coeffs)
    return tuple(q(npoly.Polynomial([-shift, 1.0])).coef)


def hermite_gaussian_system(grid: Grid, m: int, shift: float = 0.0, tol: float = DEFAULT_TOL) -> BiorthoSystem:
    """Hermite-Gaussian system of size ``m``, optionally centred at ``shift``.

    ``p~_n = He_{n-1}(x - s) / sqrt(sqrt(2 pi) (n-1)!)`` and
    ``phi~_n = p~_n(x) exp(-(x - s)**2 / 2)``.
    """
    phis, ps = [], []
    for k in range(m):
        e = np.zeros(k + 1)
        e[k] = 1.0
        c = hermite_e.herme2poly(e) / math.sqrt(math.sqrt(2 * math.pi) * math.factorial(k))
        phis.append(GridFunction.from_form(grid, GaussianProduct(tuple(c), shift, 1.0)))
        ps.append(GridFunction.polynomial(grid, _shift_coeffs(c, shift)))
    return make_biortho_system(phis, ps, tol=tol, alpha=float(m - 1))


def gaussian_system(grid: Grid, m: int, shift: float = 0.0, tol: float = DEFAULT_TOL) -> BiorthoSystem:
    """Monomials ``(x - s)**k`` with Gaussian-weighted dual functionals centred at ``s``.

    For ``m = 1`` and ``s = 0`` this is ``phi = exp(-x**2/2)/sqrt(2 pi)`` with
    ``p = 1``. A nonzero shift translates every functional and basis function.
    """
    centred = hermite_gaussian_system(grid, m, 0.0, tol)
    monos = [GridFunction.polynomial(grid, (0.0,) * k + (1.0,)) for k in range(m)]
    M = np.array([[inner(phi, p) for p in monos] for phi in centred.phis])
    D = np.linalg.inv(M)
    herm = centred if shift == 0.0 else hermite_gaussian_system(grid, m, shift, tol)
    phis = [combine(D[a], herm.phis) for a in range(m)]
    ps = [
        GridFunction.polynomial(grid, _shift_coeffs((0.0,) * k + (1.0,), shift)) for k in range(m)
    ]
    return make_biortho_system(phis, ps, tol=tol, alpha=float(m - 1))


def delta_system(grid: Grid, m: int, tol: float = DEFAULT_TOL) -> BiorthoSystem:
    """Boundary-value system at 0: ``phi_n = (-1)**(n-1) delta^(n-1)``, ``p_n = x**(n-1)/(n-1)!``."""
    phis = [
        GridFunction.delta(grid, 0.0, (-1.0) ** k, order=k) for k in range(m)
    ]
    ps = [
        GridFunction.polynomial(grid, (0.0,) * k + (1.0 / math.factorial(k),)) for k in range(m)
    ]
    return make_biortho_system(phis, ps, tol=tol, alpha=float(m - 1))


# ---------------------------------------------------------------------------
# Projectors
# ---------------------------------------------------------------------------


def proj_np(sys: BiorthoSystem, f: GridFunction) -> GridFunction:
    """``sum_n <phi_n, f> p_n``, returned with a Polynomial form."""
    c = sys.coefficients(f)
    poly = Polynomial(())
    for cn, p in zip(c, sys.polynomials()):
        poly = poly + p.scaled(float(cn))
    return GridFunction.from_form(f.grid, poly)


def _check_moments(sys: BiorthoSystem, g: GridFunction) -> None:
    if np.any(g.samples) and not has_finite_weighted_l1(g.regular(), sys.alpha):
        raise DivergentMomentError("function decays too slowly for its null-space moments to exist")


def proj_nphi(sys: BiorthoSystem, g: GridFunction) -> GridFunction:
    """``sum_n <p_n, g> phi_n``."""
    _check_moments(sys, g)
    return combine(sys.moments(g), sys.phis)


def nullspace_norm(sys: BiorthoSystem, p: GridFunction, tol: float = 1e-6) -> float:
    """Euclidean norm of ``phi(p)`` for ``p`` in the span of the basis."""
    c = sys.coefficients(p)
    recon = combine(c, sys.ps)
    scale = max(1.0, float(np.max(np.abs(p.samples))))
    resid = float(np.max(np.abs(recon.samples - p.samples))) / scale
    if resid > tol:
        raise ValueError(f"function is not in the null space (residual {resid:.3e})")
    return float(np.linalg.norm(c))


def change_of_basis(
    sys: BiorthoSystem,
    new_phis: Sequence[GridFunction],
    predual_norm: Optional[Callable[[BiorthoSystem, GridFunction], float]] = None,
    tol: float = DEFAULT_TOL,
) -> tuple:
    """Build the system ``(phi~, p~)`` with ``p~ = C^{-1} p`` spanning the same null space.

    Parameters
    ----------
    sys : BiorthoSystem
    new_phis : sequence of GridFunction
    predual_norm : callable, optional
        ``predual_norm(system, g)`` evaluating the pre-dual norm associated with a
        system. When given, the native-norm equivalence constants ``A1`` and
        ``A2`` are estimated from it.
    """
    new_phis = tuple(new_phis)
    if len(new_phis) != sys.n0:
        raise ValueError("new functionals must match the null-space dimension")
    C = np.array([[inner(phi, p) for p in sys.ps] for phi in new_phis])
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ValueError(f"change-of-basis matrix is ill-conditioned (cond = {cond:.3e})")
    B = np.linalg.inv(C)
    polys = sys.polynomials()
    new_ps = []
    for n in range(sys.n0):
        poly = Polynomial(())
        for m_ in range(sys.n0):
            poly = poly + polys[m_].scaled(float(B[m_, n]))
        new_ps.append(GridFunction.from_form(sys.grid, poly))
    new_sys = make_biortho_system(new_phis, new_ps, tol=tol, alpha=sys.alpha)
    A1 = A2 = None
    if predual_norm is not None:
        A2 = 1.0 + sum(predual_norm(sys, phi) for phi in new_sys.phis)
        A1 = 1.0 / (1.0 + sum(predual_norm(new_sys, phi) for phi in sys.phis))
    cob = ChangeOfBasis(
        C=C,
        B=B,
        B1=1.0 / float(np.linalg.norm(B, "fro")),
        B2=float(np.linalg.norm(C, "fro")),
        A1=A1,
        A2=A2,
    )
    return new_sys, cob


def projector_bound(sys: Optional[BiorthoSystem], alpha: float) -> float:
    """``sqrt(sum_n ||p_n||_{inf,alpha}**2)`` on the truncated grid."""
    if sys is None or not sys.ps:
        return 0.0
    return math.sqrt(sum(weighted_sup_norm(p, alpha) ** 2 for p in sys.ps))


def projector_checks(sys: BiorthoSystem, trials: int = 100, seed: int = 0, tol: float = 1e-6):
    """Idempotence, complementarity and mutual adjointness of the two projectors.

    Random inputs are Gaussian mixtures, plus a null-space polynomial on the
    ``N_p`` side.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    rng = np.random.default_rng(seed)
    grid = sys.grid
    worst = dict.fromkeys(["idempotence_np", "idempotence_nphi", "complementarity", "adjointness"], 0.0)
    for _ in range(int(trials)):
        f = random_mixture(rng, grid) + random_null_polynomial(rng, grid, sys.n0)
        g = random_mixture(rng, grid)
        pf = proj_np(sys, f)
        worst["idempotence_np"] = max(
            worst["idempotence_np"], float(np.max(np.abs(proj_np(sys, pf).samples - pf.samples)))
        )
        pg = proj_nphi(sys, g)
        twice = proj_nphi(sys, pg)
        worst["idempotence_nphi"] = max(
            worst["idempotence_nphi"],
            float(np.max(np.abs(sys.moments(twice) - sys.moments(pg)))),
            float(np.max(np.abs(twice.samples - pg.samples))),
        )
        rest = proj_nphi(sys, g - pg)
        worst["complementarity"] = max(
            worst["complementarity"],
            float(np.max(np.abs(rest.samples))),
            float(np.max(np.abs(sys.moments(g - pg)))),
        )
        worst["adjointness"] = max(worst["adjointness"], abs(inner(pf, g) - inner(f, pg)))
    report = Report("projectors")
    for name, value in worst.items():
        report.add(name, value, tol)
    return report
