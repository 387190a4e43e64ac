"""Functions on a truncated uniform grid.

This module is the numerical substrate: a :class:`Grid`, a :class:`GridFunction`
holding samples plus an optional closed-form tag, quadrature-based pairings,
algebraically weighted norms, and finite-difference derivatives.

Closed-form tags let downstream code act on functions analytically:

* :class:`Polynomial` -- ascending monomial coefficients.
* :class:`GreenAtom` -- ``weight * rho_m(x - center)`` with
  ``rho_m(x) = sign(x) x**(m-1) / (2 (m-1)!)``.
* :class:`GaussianProduct` -- polynomial times a Gaussian.
* :class:`Sum` -- a finite sum of the above.

Dirac atoms (:class:`DeltaAtom`) never have pointwise samples. They live in the
``atoms`` field of a :class:`GridFunction` and only contribute to pairings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Grid",
    "WeightSpec",
    "Polynomial",
    "GreenAtom",
    "GaussianProduct",
    "DeltaAtom",
    "Sum",
    "GridFunction",
    "GridMismatchError",
    "rho",
    "inner",
    "weighted_sup_norm",
    "weighted_l1_norm",
    "fd_derivative",
    "growth_exponent",
    "exceeds_growth",
    "has_finite_weighted_l1",
    "interior_mask",
]

DEFAULT_T = 12.0
DEFAULT_N = 4801


class GridMismatchError(ValueError):
    """Raised when two grid functions live on different grids."""


# ---------------------------------------------------------------------------
# Grid and weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_min = x_0 < ... < x_{n-1} = x_max``."""

    x_min: float = -DEFAULT_T
    x_max: float = DEFAULT_T
    n: int = DEFAULT_N

    def __post_init__(self):
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid endpoints must be finite")
        if not self.x_min < self.x_max:
            raise ValueError("grid requires x_min < x_max")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("grid requires n >= 3")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def symmetric(cls, T: float = DEFAULT_T, n: int = DEFAULT_N) -> "Grid":
        return cls(-T, T, n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n)
        x.flags.writeable = False
        return x

    @property
    def half_width(self) -> float:
        return max(abs(self.x_min), abs(self.x_max))

    def contains(self, t: float) -> bool:
        return self.x_min <= t <= self.x_max

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n), Polynomial(()))


@dataclass(frozen=True)
class WeightSpec:
    """Algebraic weight exponent ``alpha`` for the weights ``(1+|x|)**(-/+alpha)``."""

    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")


def _alpha(w: Union[WeightSpec, float]) -> float:
    return w.alpha if isinstance(w, WeightSpec) else float(w)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def rho(m: int, x):
    """Causal-symmetric Green's function of ``D**m``: ``sign(x) x**(m-1) / (2 (m-1)!)``."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * np.sign(x) * x ** (m - 1) / math.factorial(m - 1)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with ascending monomial coefficients."""

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, x):
        if not self.coeffs:
            return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
        return npoly.polyval(np.asarray(x, dtype=float), self.coeffs)

    def deriv(self, k: int = 1) -> "Polynomial":
        if k == 0:
            return self
        if len(self.coeffs) <= k:
            return Polynomial(())
        return Polynomial(tuple(npoly.polyder(self.coeffs, k)))

    @property
    def degree(self) -> int:
        c = np.trim_zeros(np.asarray(self.coeffs), "b")
        return len(c) - 1

    def scaled(self, s: float) -> "Polynomial":
        return Polynomial(tuple(s * c for c in self.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(tuple(npoly.polyadd(self.coeffs or (0.0,), other.coeffs or (0.0,))))

    @classmethod
    def monomial(cls, k: int, scale: float = 1.0) -> "Polynomial":
        return cls((0.0,) * k + (scale,))


@dataclass(frozen=True)
class GreenAtom:
    """``weight * rho_order(x - center)``."""

    order: int
    center: float
    weight: float = 1.0

    def __call__(self, x):
        return self.weight * rho(self.order, np.asarray(x, dtype=float) - self.center)

    def scaled(self, s: float) -> "GreenAtom":
        return GreenAtom(self.order, self.center, s * self.weight)


@dataclass(frozen=True)
class GaussianProduct:
    """``q(x - center) * exp(-(x - center)**2 / (2 width**2))`` with polynomial ``q``.

    Closed under differentiation, so Gaussian test functions and Hermite-Gaussian
    functionals can be differentiated exactly.
    """

    coeffs: tuple
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.width > 0:
            raise ValueError("width must be positive")

    def __call__(self, x):
        u = np.asarray(x, dtype=float) - self.center
        return npoly.polyval(u, self.coeffs or (0.0,)) * np.exp(-0.5 * (u / self.width) ** 2)

    def deriv(self, k: int = 1) -> "GaussianProduct":
        c = np.asarray(self.coeffs or (0.0,), dtype=float)
        for _ in range(k):
            # (q e)' = (q' - u q / s**2) e
            c = npoly.polysub(npoly.polyder(c), npoly.polymulx(c) / self.width**2)
        return GaussianProduct(tuple(c), self.center, self.width)

    def scaled(self, s: float) -> "GaussianProduct":
        return GaussianProduct(tuple(s * c for c in self.coeffs), self.center, self.width)


@dataclass(frozen=True)
class DeltaAtom:
    """``weight * delta^(order)(x - center)``; quadrature-only, never sampled."""

    center: float
    weight: float = 1.0
    order: int = 0

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("derivative order must be non-negative")

    def scaled(self, s: float) -> "DeltaAtom":
        return DeltaAtom(self.center, s * self.weight, self.order)


@dataclass(frozen=True)
class Sum:
    """Finite sum of :class:`Polynomial`, :class:`GreenAtom` and :class:`GaussianProduct` terms."""

    terms: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x) + 0.0
        for t in self.terms:
            out = out + t(x)
        return out

    def scaled(self, s: float) -> "Sum":
        return Sum(tuple(t.scaled(s) for t in self.terms))


Form = Union[Polynomial, GreenAtom, GaussianProduct, Sum]


def _terms(form) -> tuple:
    if form is None:
        return ()
    return form.terms if isinstance(form, Sum) else (form,)


def _simplify(terms: Iterable) -> Form:
    poly = None
    rest = []
    for t in terms:
        if isinstance(t, Polynomial):
            poly = t if poly is None else poly + t
        else:
            rest.append(t)
    if not rest:
        return poly if poly is not None else Polynomial(())
    if poly is not None and any(c != 0.0 for c in poly.coeffs):
        rest.append(poly)
    return rest[0] if len(rest) == 1 else Sum(tuple(rest))


def _add_forms(a, b):
    if a is None or b is None:
        return None
    return _simplify(_terms(a) + _terms(b))


def _scale_form(a, s):
    return None if a is None else a.scaled(s)


def form_derivative(form, k: int):
    """Analytic ``k``-th derivative of a closed form.

    Returns ``(regular_form, atoms)``: a Green atom of order ``m`` differentiated
    ``m`` times or more turns into Dirac atoms.
    """
    regular = []
    atoms = []
    for t in _terms(form):
        if isinstance(t, (Polynomial, GaussianProduct)):
            regular.append(t.deriv(k))
        elif isinstance(t, GreenAtom):
            if k < t.order:
                regular.append(GreenAtom(t.order - k, t.center, t.weight))
            else:
                atoms.append(DeltaAtom(t.center, t.weight, k - t.order))
        else:  # pragma: no cover - defensive
            raise TypeError(f"unsupported form term {t!r}")
    return _simplify(regular), tuple(atoms)


def _form_value_derivative(form, k: int, t: float) -> float:
    """Evaluate the ``k``-th derivative of a closed form at ``t``."""
    total = 0.0
    for term in _terms(form):
        if isinstance(term, (Polynomial, GaussianProduct)):
            total += float(term.deriv(k)(t))
        elif k < term.order:
            total += float(GreenAtom(term.order - k, term.center, term.weight)(t))
        else:
            raise ValueError("derivative of a Green atom is singular at this order")
    return total


# ---------------------------------------------------------------------------
# GridFunction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled function on a :class:`Grid` with optional closed form and Dirac atoms.

    Parameters
    ----------
    grid : Grid
    samples : array_like
        Values of the regular part at the grid nodes.
    form : Polynomial, GreenAtom, Sum or None
        Closed form of the regular part, if known.
    atoms : tuple of DeltaAtom
        Singular part, used only in pairings.
    """

    grid: Grid
    samples: np.ndarray
    form: object = None
    atoms: tuple = field(default=())

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.shape != (self.grid.n,):
            raise ValueError(f"samples must have length {self.grid.n}, got shape {s.shape}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "atoms", tuple(self.atoms))
        for a in self.atoms:
            if not isinstance(a, DeltaAtom):
                raise TypeError("atoms must be DeltaAtom instances")

    # constructors ---------------------------------------------------------
    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        return cls(grid, np.broadcast_to(np.asarray(fn(grid.x), dtype=float), (grid.n,)))

    @classmethod
    def from_form(cls, grid: Grid, form: Form) -> "GridFunction":
        return cls(grid, np.broadcast_to(np.asarray(form(grid.x), dtype=float), (grid.n,)), form)

    @classmethod
    def polynomial(cls, grid: Grid, coeffs: Sequence[float]) -> "GridFunction":
        return cls.from_form(grid, Polynomial(tuple(coeffs)))

    @classmethod
    def green_atom(cls, grid: Grid, order: int, center: float, weight: float = 1.0) -> "GridFunction":
        return cls.from_form(grid, GreenAtom(order, center, weight))

    @classmethod
    def delta(cls, grid: Grid, center: float, weight: float = 1.0, order: int = 0) -> "GridFunction":
        if not grid.contains(center):
            raise ValueError(f"delta center {center} outside grid")
        return cls(grid, np.zeros(grid.n), Polynomial(()), (DeltaAtom(center, weight, order),))

    # properties -----------------------------------------------------------
    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def is_singular(self) -> bool:
        return bool(self.atoms)

    def regular(self) -> "GridFunction":
        return GridFunction(self.grid, self.samples, self.form)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "GridFunction"):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError("grid functions live on different grids")
        return None

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = GridFunction.polynomial(self.grid, (float(other),))
        if self._check(other) is NotImplemented:
            return NotImplemented
        return GridFunction(
            self.grid,
            self.samples + other.samples,
            _add_forms(self.form, other.form),
            self.atoms + other.atoms,
        )

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if not isinstance(s, (int, float, np.floating, np.integer)):
            return NotImplemented
        s = float(s)
        return GridFunction(
            self.grid,
            s * self.samples,
            _scale_form(self.form, s),
            tuple(a.scaled(s) for a in self.atoms),
        )

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / float(s))

    def __repr__(self):
        kind = type(self.form).__name__ if self.form is not None else "sampled"
        return f"GridFunction(n={self.grid.n}, form={kind}, atoms={len(self.atoms)})"


# ---------------------------------------------------------------------------
# Quadrature and pairings
# ---------------------------------------------------------------------------


def _trapezoid(values: np.ndarray, dx: float) -> float:
    return float(dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def _local_interp(grid: Grid, y: np.ndarray, t: float) -> float:
    """Cubic Lagrange interpolation of nodal values at ``t``."""
    u = (t - grid.x_min) / grid.dx
    i = int(round(u))
    if abs(u - i) < 1e-12:
        return float(y[min(max(i, 0), grid.n - 1)])
    j0 = min(max(int(np.floor(u)) - 1, 0), grid.n - 4)
    idx = np.arange(j0, j0 + 4)
    nodes = idx.astype(float)
    vals = y[idx]
    total = 0.0
    for a in range(4):
        la = 1.0
        for b in range(4):
            if b != a:
                la *= (u - nodes[b]) / (nodes[a] - nodes[b])
        total += la * vals[a]
    return float(total)


def _pair_atom(atom: DeltaAtom, g: GridFunction) -> float:
    if not g.grid.contains(atom.center):
        raise ValueError(f"delta center {atom.center} outside grid")
    k = atom.order
    sign = -1.0 if k % 2 else 1.0
    if g.form is not None:
        try:
            return sign * atom.weight * _form_value_derivative(g.form, k, atom.center)
        except ValueError:
            pass
    deriv = fd_derivative(g.regular(), k).samples if k else g.samples
    return sign * atom.weight * _local_interp(g.grid, deriv, atom.center)


def inner(f: GridFunction, g: GridFunction) -> float:
    """Duality product ``<f, g>`` by trapezoid quadrature.

    Dirac atoms on either side are paired pointwise with the regular part of the
    other operand via ``<delta^(k)(. - t), g> = (-1)**k g^(k)(t)``.
    """
    if f.grid != g.grid:
        raise GridMismatchError("grid functions live on different grids")
    if f.atoms and g.atoms:
        raise ValueError("cannot pair two singular distributions")
    total = _trapezoid(f.samples * g.samples, f.grid.dx)
    for a in f.atoms:
        total += _pair_atom(a, g)
    for a in g.atoms:
        total += _pair_atom(a, f)
    return total


def _require_samples(f: GridFunction, what: str):
    if f.atoms:
        raise ValueError(f"{what} requires a sampled function without Dirac atoms")


def weighted_sup_norm(f: GridFunction, w: Union[WeightSpec, float]) -> float:
    """``max_x (1+|x|)**(-alpha) |f(x)|`` over the grid."""
    _require_samples(f, "weighted_sup_norm")
    a = _alpha(w)
    return float(np.max((1.0 + np.abs(f.x)) ** (-a) * np.abs(f.samples)))


def weighted_l1_norm(f: GridFunction, w: Union[WeightSpec, float]) -> float:
    """Trapezoid quadrature of ``(1+|x|)**alpha |f(x)|``."""
    _require_samples(f, "weighted_l1_norm")
    a = _alpha(w)
    return _trapezoid((1.0 + np.abs(f.x)) ** a * np.abs(f.samples), f.grid.dx)


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

MAX_FD_ORDER = 4


@lru_cache(maxsize=None)
def _fd_weights(offsets: tuple, k: int) -> np.ndarray:
    o = np.asarray(offsets, dtype=float)
    p = np.arange(len(o))
    V = o[None, :] ** p[:, None]
    rhs = np.zeros(len(o))
    rhs[k] = math.factorial(k)
    return np.linalg.solve(V, rhs)


def _fd_samples(y: np.ndarray, dx: float, k: int) -> np.ndarray:
    n = len(y)
    h = (k + 1) // 2 + 1
    width = min(k + 4, n)
    out = np.empty(n)
    wc = _fd_weights(tuple(range(-h, h + 1)), k)
    # Weights sum to zero for k >= 1, so differencing against the centre
    # sample keeps constants exact despite rounding in the weights.
    centre = y[h : n - h]
    acc = np.zeros(n - 2 * h)
    for j, c in enumerate(wc):
        if j != h:
            acc += c * (y[j : n - 2 * h + j] - centre)
    out[h : n - h] = acc
    for i in list(range(h)) + list(range(n - h, n)):
        start = 0 if i < h else n - width
        offs = tuple(range(start - i, start - i + width))
        wb = _fd_weights(offs, k)
        out[i] = wb @ (y[start : start + width] - y[i])
    return out / dx**k


def fd_derivative(f: GridFunction, order: int) -> GridFunction:
    """Derivative of order ``order`` (0..4).

    Polynomial and Gaussian-product forms are differentiated analytically. Other inputs use
    fourth-order accurate stencils: central in the interior, one-sided windows
    near the ends.
    """
    if int(order) != order or order < 0:
        raise ValueError("order must be a non-negative integer")
    if order > MAX_FD_ORDER:
        raise ValueError(f"order {order} exceeds supported maximum {MAX_FD_ORDER}")
    _require_samples(f, "fd_derivative")
    if order == 0:
        return f
    if f.grid.n < 2 * order + 1:
        raise ValueError("grid resolution too coarse for requested derivative order")
    if f.form is not None and all(
        isinstance(t, (Polynomial, GaussianProduct)) for t in _terms(f.form)
    ):
        form, _ = form_derivative(f.form, order)
        return GridFunction.from_form(f.grid, form)
    if f.grid.n < order + 4:
        raise ValueError("grid resolution too coarse for requested derivative order")
    return GridFunction(f.grid, _fd_samples(f.samples, f.grid.dx, order))


# ---------------------------------------------------------------------------
# Growth probes
# ---------------------------------------------------------------------------


def interior_mask(grid: Grid, margin: int) -> np.ndarray:
    mask = np.zeros(grid.n, dtype=bool)
    mask[margin : grid.n - margin] = True
    return mask


def growth_exponent(f: GridFunction, tail_fraction: float = 0.2) -> float:
    """Estimated algebraic growth exponent of ``|f|`` at the ends of the grid.

    Fits ``log|f|`` against ``log|x|`` by least squares over the outermost
    ``tail_fraction`` of the nodes (half on each side). Returns ``-inf`` when the
    tail vanishes identically.
    """
    _require_samples(f, "growth_exponent")
    x = f.x
    ax = np.abs(x)
    k = max(int(round(tail_fraction * f.grid.n)), 4)
    idx = np.argsort(-ax, kind="stable")[:k]
    xs, ys = ax[idx], np.abs(f.samples[idx])
    keep = (ys > 1e-300) & (xs > 0)
    if keep.sum() < 2:
        return float("-inf")
    lx = np.log(xs[keep])
    ly = np.log(ys[keep])
    if np.ptp(lx) == 0:
        return float("-inf")
    slope = np.polyfit(lx, ly, 1)[0]
    return float(slope)


def exceeds_growth(f: GridFunction, alpha: float, slack: float = 0.1) -> bool:
    """True when ``f`` appears to grow faster than ``(1+|x|)**alpha``."""
    return growth_exponent(f) > alpha + slack


def has_finite_weighted_l1(f: GridFunction, alpha: float, slack: float = 0.1) -> bool:
    """True when ``(1+|x|)**alpha |f|`` decays fast enough to be integrable."""
    if f.atoms and not np.any(f.samples):
        return True
    weighted = GridFunction(f.grid, (1.0 + np.abs(f.x)) ** alpha * f.samples)
    return growth_exponent(weighted) < -1.0 - slack
