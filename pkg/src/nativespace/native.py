"""Native spaces: stabilized pseudo-inverses, native and pre-dual norms, decomposition.

A :class:`NativeSpaceSpec` combines an operator ``L``, a biorthogonal system
``(phi, p)`` and a primary norm ``X'`` (``L2``, ``M`` or ``Lp``). The native norm
is ``||Lf||_{X'} + ||phi(f)||_2`` and the pre-dual norm is
``max(||L^{-1*}_phi g||_X, ||p(g)||_2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .biortho import (
    BiorthoSystem,
    _check_moments,
    change_of_basis,
    combine,
    proj_np,
    proj_nphi,
)
from .gridfn import (
    GridFunction,
    _fd_weights,
    exceeds_growth,
    growth_exponent,
    inner,
    interior_mask,
)
from .operator import (
    OperatorDescriptor,
    apply,
    apply_adjoint,
    canonical_inverse,
    canonical_inverse_adjoint,
)
from .report import Report
from .testfunctions import random_green_sum, random_mixture, random_null_polynomial

__all__ = [
    "PrimaryNorm",
    "NativeSpaceSpec",
    "NotAdmissibleError",
    "NotInNativeSpaceError",
    "NormValue",
    "Decomposition",
    "make_native_space",
    "stabilized_inverse",
    "stabilized_inverse_adjoint",
    "native_norm",
    "predual_norm",
    "decompose",
    "reconstruct",
    "identity_suite",
    "norm_equivalence_check",
]


class NotAdmissibleError(ValueError):
    """Raised when a biorthogonal system is incompatible with the chosen norm."""


class NotInNativeSpaceError(ValueError):
    """Raised when a function fails the numerical membership probes."""


def _trapz(values: np.ndarray, dx: float) -> float:
    return float(dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def _merged_atoms(atoms) -> dict:
    merged: dict = {}
    for a in atoms:
        key = (a.center, a.order)
        merged[key] = merged.get(key, 0.0) + a.weight
    return merged


@dataclass(frozen=True)
class PrimaryNorm:
    """Primary norm of ``X'`` and its pre-dual ``X``.

    ``kind`` is ``"L2"``, ``"M"`` (total variation, pre-dual ``C0``) or ``"Lp"``
    with exponent ``p > 1`` (pre-dual ``Lq``, ``1/p + 1/q = 1``).
    """

    kind: str = "L2"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("L2", "M", "Lp"):
            raise ValueError(f"unknown primary norm {self.kind!r}")
        if self.kind == "L2":
            object.__setattr__(self, "p", 2.0)
        if self.kind == "Lp" and not (1.0 < self.p < math.inf):
            raise ValueError("Lp exponent must lie in (1, inf)")

    @property
    def predual_name(self) -> str:
        return {"L2": "L2", "M": "C0", "Lp": f"L{self.q:g}"}[self.kind]

    @property
    def q(self) -> float:
        return math.inf if self.kind == "M" else self.p / (self.p - 1.0)

    def dual_norm(self, w: GridFunction, radius: Optional[float] = None) -> float:
        """``||w||_{X'}``, optionally restricted to ``|x| <= radius``."""
        x = w.grid.x
        mask = np.ones(w.grid.n, dtype=bool) if radius is None else np.abs(x) <= radius
        vals = np.where(mask, w.samples, 0.0)
        atoms = [a for a in w.atoms if radius is None or abs(a.center) <= radius]
        merged = {k: v for k, v in _merged_atoms(atoms).items() if v != 0.0}
        if self.kind == "M":
            if any(order > 0 for (_, order) in merged):
                return math.inf
            return sum(abs(v) for v in merged.values()) + _trapz(np.abs(vals), w.grid.dx)
        if merged:
            return math.inf
        p = self.p
        return _trapz(np.abs(vals) ** p, w.grid.dx) ** (1.0 / p)

    def predual_value(self, v: GridFunction) -> float:
        """``||v||_X`` of a sampled function."""
        if v.atoms:
            raise ValueError("pre-dual norm requires a sampled function")
        if self.kind == "M":
            return float(np.max(np.abs(v.samples)))
        q = self.q
        return _trapz(np.abs(v.samples) ** q, v.grid.dx) ** (1.0 / q)


@dataclass(frozen=True, eq=False)
class NativeSpaceSpec:
    """Operator, biorthogonal system and primary norm defining a native space."""

    op: OperatorDescriptor
    sys: BiorthoSystem
    primary_norm: PrimaryNorm

    @property
    def grid(self):
        return self.sys.grid


def _coeff_matrix(polys, size: int) -> np.ndarray:
    M = np.zeros((size, len(polys)))
    for j, p in enumerate(polys):
        c = np.asarray(p.coeffs, dtype=float)
        M[: len(c), j] = c
    return M


def _span_residual(A: np.ndarray, Bm: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(A, Bm, rcond=None)
    r = A @ coef - Bm
    scale = np.maximum(np.linalg.norm(Bm, axis=0), 1e-300)
    return float(np.max(np.linalg.norm(r, axis=0) / scale))


def make_native_space(
    op: OperatorDescriptor, sys: BiorthoSystem, primary_norm: PrimaryNorm = PrimaryNorm()
) -> NativeSpaceSpec:
    """Validate compatibility of ``op``, ``sys`` and the norm.

    Raises
    ------
    ValueError
        If ``sys.ps`` does not span the null space of ``op``.
    NotAdmissibleError
        If the norm is ``M`` and some ``phi_n`` contains Dirac atoms.
    """
    if sys.n0 != op.n0:
        raise ValueError("system size does not match the null-space dimension")
    polys = sys.polynomials()
    size = max(max(len(p.coeffs) for p in polys), max(len(p.coeffs) for p in op.null_basis), 1)
    A = _coeff_matrix(polys, size)
    Bm = _coeff_matrix(op.null_basis, size)
    if max(_span_residual(A, Bm), _span_residual(Bm, A)) > 1e-8:
        raise ValueError("system basis does not span the operator null space")
    if primary_norm.kind == "M" and sys.has_atoms:
        raise NotAdmissibleError("phi not admissible for X = C0")
    return NativeSpaceSpec(op, sys, primary_norm)


# ---------------------------------------------------------------------------
# Pseudo-inverses
# ---------------------------------------------------------------------------


def stabilized_inverse(spec: NativeSpaceSpec, w: GridFunction) -> GridFunction:
    """``L^{-1}_phi w = (I - Proj_Np) L^{-1} w``; its ``phi``-moments vanish."""
    f = canonical_inverse(spec.op, w)
    return f - proj_np(spec.sys, f)


def stabilized_inverse_adjoint(spec: NativeSpaceSpec, g: GridFunction) -> GridFunction:
    """``L^{-1*}_phi g = L^{-1*} (I - Proj_Nphi) g``; annihilates every ``phi_n``."""
    h = g - proj_nphi(spec.sys, g)
    return canonical_inverse_adjoint(spec.op, h)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


class NormValue(NamedTuple):
    value: float
    lf_norm: float
    null_norm: float


def _membership(spec: NativeSpaceSpec, f: GridFunction, w: GridFunction, lf: float) -> None:
    if np.any(f.samples) and exceeds_growth(f.regular(), spec.op.alpha):
        raise NotInNativeSpaceError(
            f"growth exponent {growth_exponent(f.regular()):.2f} exceeds {spec.op.alpha:g}"
        )
    if not math.isfinite(lf):
        raise NotInNativeSpaceError(
            f"Lf has infinite {spec.primary_norm.kind} norm (singular part not admissible)"
        )
    inner_lf = spec.primary_norm.dual_norm(w, radius=2.0 * spec.grid.half_width / 3.0)
    if lf > 1e-12 and lf > 1.05 * inner_lf:
        raise NotInNativeSpaceError(
            f"||Lf|| grows from {inner_lf:.4g} to {lf:.4g} between 2T/3 and T (divergent)"
        )


def native_norm(spec: NativeSpaceSpec, f: GridFunction, check_membership: bool = True) -> NormValue:
    """``||f|| = ||Lf||_{X'} + ||phi(f)||_2``.

    Returns the value together with both parts. Membership is probed by the
    growth exponent of ``f`` and by comparing ``||Lf||`` on ``|x| <= T`` and
    ``|x| <= 2T/3``.
    """
    w = apply(spec.op, f)
    lf = spec.primary_norm.dual_norm(w)
    if check_membership:
        _membership(spec, f, w, lf)
    null = float(np.linalg.norm(spec.sys.coefficients(f)))
    return NormValue(lf + null, lf, null)


def predual_norm(spec: NativeSpaceSpec, g: GridFunction) -> float:
    """``max(||L^{-1*}_phi g||_X, ||p(g)||_2)``."""
    _check_moments(spec.sys, g)
    v = stabilized_inverse_adjoint(spec, g)
    return max(spec.primary_norm.predual_value(v.regular()) if not v.atoms else math.inf,
               float(np.linalg.norm(spec.sys.moments(g))))


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``f = L^{-1}_phi w + sum_n p_coeffs[n] p_n`` with ``w = Lf``."""

    w: GridFunction
    p_coeffs: np.ndarray
    residual: float


def reconstruct(spec: NativeSpaceSpec, dec: Decomposition) -> GridFunction:
    return stabilized_inverse(spec, dec.w) + combine(dec.p_coeffs, spec.sys.ps)


def decompose(spec: NativeSpaceSpec, f: GridFunction, tol: float = 1e-5) -> Decomposition:
    """Split ``f`` into ``w = Lf`` and its null-space coordinates ``phi(f)``."""
    native_norm(spec, f, check_membership=True)
    w = apply(spec.op, f)
    c = spec.sys.coefficients(f)
    dec = Decomposition(w, c, 0.0)
    mask = interior_mask(spec.grid, 5 * spec.op.m)
    resid = float(np.max(np.abs(reconstruct(spec, dec).samples - f.samples)[mask]))
    if resid > tol:
        raise NotInNativeSpaceError(f"reconstruction residual {resid:.3e} exceeds {tol:.1e}")
    return Decomposition(w, c, resid)


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


def _sup(a: np.ndarray, mask: np.ndarray) -> float:
    return float(np.max(np.abs(a[mask])))


def _rounding_floor(samples: np.ndarray, weight: np.ndarray, m: int, dx: float) -> float:
    """Rounding loss of an ``m``-th difference of ``samples``, weighted as the residuals."""
    h = (m + 1) // 2 + 1
    stencil = float(np.sum(np.abs(_fd_weights(tuple(range(-h, h + 1)), m))))
    return 10.0 * np.finfo(float).eps * stencil / dx**m * float(np.max(weight * np.abs(samples)))


def identity_suite(
    spec: NativeSpaceSpec, trials: int, seed: int, tol: float = 1e-4, weight_alpha: Optional[float] = None
) -> Report:
    """Randomized check of the inverse identities on Gaussian-mixture inputs.

    Residuals (sup-norm on nodes at least ``5 m`` from the boundary and, for
    systems with delta functionals, from the atom centres, where the identities
    hold only in the distributional sense):

    * ``left_inverse_adjoint``: ``L^{-1*}_phi L* v - v``
    * ``pseudo_right_inverse_adjoint``: ``L* L^{-1*}_phi g - (I - Proj_Nphi) g``
    * ``right_inverse``: ``L L^{-1}_phi w - w``
    * ``left_pseudo_inverse``: ``L^{-1}_phi L f - (I - Proj_Np) f``
    * ``isometry``: ``| ||L^{-1*}_phi L* v||_X - ||v||_X |``
    * ``nullspace_annihilation``: ``L^{-1*}_phi phi_n`` and ``phi(L^{-1}_phi w)``

    The four inverse residuals are weighted by ``(1 + |x|)**(-weight_alpha)``.
    The default is 0 for ``m <= 2`` and ``alpha = m - 1`` otherwise: pseudo-inverse
    outputs grow like ``|x|**alpha`` and an ``m``-th difference of such samples
    loses about ``eps |f| / dx**m`` to rounding. Unweighted values are kept in
    ``info``. The two checks that differentiate an inverted sample vector
    (``right_inverse`` and ``pseudo_right_inverse_adjoint``) use
    ``max(tol, floor)`` as threshold, where ``floor`` estimates that rounding
    loss; it only matters for ``m >= 3``.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    op, sys, norm = spec.op, spec.sys, spec.primary_norm
    grid = spec.grid
    mask = interior_mask(grid, 5 * op.m)
    for phi in sys.phis:
        for atom in phi.atoms:
            mask &= np.abs(grid.x - atom.center) > 5 * op.m * grid.dx
    if weight_alpha is None:
        weight_alpha = 0.0 if op.m <= 2 else op.alpha
    weight = (1.0 + np.abs(grid.x)) ** (-weight_alpha)
    plain: dict = {}
    floor = 0.0

    def residual(name: str, diff: np.ndarray) -> None:
        plain[name] = max(plain.get(name, 0.0), _sup(diff, mask))
        worst[name] = max(worst[name], _sup(weight * diff, mask))

    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(
        ["left_inverse_adjoint", "pseudo_right_inverse_adjoint", "right_inverse",
         "left_pseudo_inverse", "isometry", "boundary_annihilation"], 0.0)
    duality_gap, lower_ratio = 0.0, 0.0
    for _ in range(int(trials)):
        v = random_mixture(rng, grid)
        u = stabilized_inverse_adjoint(spec, apply_adjoint(op, v))
        residual("left_inverse_adjoint", u.samples - v.samples)
        worst["isometry"] = max(
            worst["isometry"], abs(norm.predual_value(u.regular()) - norm.predual_value(v))
        )

        g = random_mixture(rng, grid)
        ug = stabilized_inverse_adjoint(spec, g)
        lhs = apply_adjoint(op, ug)
        rhs = g - proj_nphi(sys, g)
        residual("pseudo_right_inverse_adjoint", lhs.samples - rhs.samples)
        floor = max(floor, _rounding_floor(ug.samples, weight, op.m, grid.dx))

        w = random_mixture(rng, grid)
        fw = stabilized_inverse(spec, w)
        residual("right_inverse", apply(op, fw).samples - w.samples)
        floor = max(floor, _rounding_floor(fw.samples, weight, op.m, grid.dx))
        worst["boundary_annihilation"] = max(
            worst["boundary_annihilation"], float(np.max(np.abs(sys.coefficients(fw))))
        )

        f = random_mixture(rng, grid) + random_null_polynomial(rng, grid, op.m)
        back = stabilized_inverse(spec, apply(op, f))
        target = f - proj_np(sys, f)
        residual("left_pseudo_inverse", back.samples - target.samples)

        # Duality: <f, g> splits as <Lf, L^{-1*}_phi g> + phi(f).p(g), which
        # bounds it by the native norm of f times the pre-dual norm of g.
        lf = apply(op, f)
        split = inner(lf, ug) + float(sys.coefficients(f) @ sys.moments(g))
        duality_gap = max(duality_gap, abs(inner(f, g) - split) / max(1.0, abs(split)))
        nf = native_norm(spec, f, check_membership=False).value
        ng = max(norm.predual_value(ug), float(np.linalg.norm(sys.moments(g))))
        lower_ratio = max(lower_ratio, abs(inner(f, g)) / (nf * ng))

    for phi in sys.phis:
        worst["boundary_annihilation"] = max(
            worst["boundary_annihilation"], _sup(stabilized_inverse_adjoint(spec, phi).samples, mask)
        )

    report = Report("identity_suite")
    for name, value in worst.items():
        relaxed = name in ("right_inverse", "pseudo_right_inverse_adjoint")
        report.add(name, value, max(tol, floor) if relaxed else tol)
    report.add("duality_split", duality_gap, tol)
    report.add("dual_norm_lower_bound_ratio", lower_ratio, 1.0 + 1e-8)
    if norm.kind == "L2":
        report.add("composite_duality", _composite_duality_gap(spec, rng), 1e-6)
    report.info.update(trials=int(trials), seed=int(seed), T=grid.half_width, n=grid.n,
                       weight_alpha=float(weight_alpha), rounding_floor=floor)
    report.info.update({f"unweighted_{k}": v for k, v in plain.items()})
    return report


def _composite_duality_gap(spec: NativeSpaceSpec, rng: np.random.Generator) -> float:
    """Attain the native norm as a pairing with a unit pre-dual-norm element.

    For ``X' = L2`` the maximiser is ``g* = L* (Lf/||Lf||) + sum_n c_n phi_n``
    with ``c = phi(f)/||phi(f)||``: the max-pairing on the pre-dual side is dual
    to the sum-pairing on the native side.
    """
    op, sys = spec.op, spec.sys
    # Narrow central bumps keep the integration-by-parts boundary terms at +-T
    # negligible against the polynomial growth of f.
    f = random_mixture(rng, spec.grid, center_range=2.0, width_range=(0.4, 0.8))
    f = f + random_null_polynomial(rng, spec.grid, op.m)
    lf = apply(op, f)
    nv = native_norm(spec, f, check_membership=False)
    c = sys.coefficients(f)
    g_star = apply_adjoint(op, lf / nv.lf_norm) + combine(c / np.linalg.norm(c), sys.phis)
    attained = inner(f, g_star)
    unit = predual_norm(spec, g_star)
    return max(abs(attained - nv.value) / nv.value, abs(unit - 1.0))


def norm_equivalence_check(
    spec: NativeSpaceSpec, alt_phis, trials: int = 50, seed: int = 0
) -> tuple:
    """Compare native norms for two systems sharing the same null space.

    Returns ``(report, alt_spec, change)``. Checks the null-space bounds
    ``B1 <= ||phi~(p)|| / ||phi(p)|| <= B2``, the native-norm bounds
    ``A1 ||f|| <= ||f||~ <= A2 ||f||`` and that ``||Lf||`` does not depend on
    the system.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    pn = lambda system, g: predual_norm(NativeSpaceSpec(spec.op, system, spec.primary_norm), g)  # noqa: E731
    alt_sys, cob = change_of_basis(spec.sys, alt_phis, predual_norm=pn)
    alt = make_native_space(spec.op, alt_sys, spec.primary_norm)
    rng = np.random.default_rng(seed)
    grid, m = spec.grid, spec.op.m
    lo, hi = math.inf, 0.0
    for _ in range(int(trials)):
        p = random_null_polynomial(rng, grid, m)
        r = np.linalg.norm(alt.sys.coefficients(p)) / np.linalg.norm(spec.sys.coefficients(p))
        lo, hi = min(lo, r), max(hi, r)
    a_lo, a_hi, lf_mismatch = math.inf, 0.0, 0
    for _ in range(int(trials)):
        if spec.primary_norm.kind == "M":
            f = random_green_sum(rng, grid, m)
        else:
            f = random_mixture(rng, grid) + random_null_polynomial(rng, grid, m)
        n1 = native_norm(spec, f, check_membership=False)
        n2 = native_norm(alt, f, check_membership=False)
        lf_mismatch += int(n1.lf_norm != n2.lf_norm)
        a_lo, a_hi = min(a_lo, n2.value / n1.value), max(a_hi, n2.value / n1.value)
    report = Report("norm_equivalence")
    report.add("nullspace_ratio_min_minus_B1", lo - cob.B1 * (1 - 1e-12), 0.0, ">")
    report.add("B2_minus_nullspace_ratio_max", cob.B2 * (1 + 1e-12) - hi, 0.0, ">")
    report.add("native_ratio_min_minus_A1", a_lo - cob.A1, 0.0, ">")
    report.add("A2_minus_native_ratio_max", cob.A2 - a_hi, 0.0, ">")
    report.add("lf_norm_mismatches", lf_mismatch, 0)
    report.info.update(B1=cob.B1, B2=cob.B2, A1=cob.A1, A2=cob.A2,
                       ratio_min=lo, ratio_max=hi, native_ratio_min=a_lo, native_ratio_max=a_hi)
    return report, alt, cob
