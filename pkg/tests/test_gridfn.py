import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nativespace import (
    DeltaAtom,
    GaussianProduct,
    Grid,
    GridFunction,
    Polynomial,
    WeightSpec,
    fd_derivative,
    inner,
    weighted_l1_norm,
    weighted_sup_norm,
)
from nativespace.gridfn import GridMismatchError, exceeds_growth, growth_exponent, interior_mask


def gauss_pdf(x):
    return np.exp(-x**2 / 2) / np.sqrt(2 * np.pi)


def test_grid_defaults_and_spacing():
    g = Grid()
    assert (g.x_min, g.x_max, g.n) == (-12.0, 12.0, 4801)
    assert g.dx == (g.x_max - g.x_min) / (g.n - 1)
    assert g.x[0] == -12.0 and g.x[-1] == 12.0


@pytest.mark.parametrize("args", [(1.0, 0.0, 10), (0.0, 1.0, 2), (0.0, math.inf, 10)])
def test_grid_rejects_invalid(args):
    with pytest.raises(ValueError):
        Grid(*args)


def test_samples_are_read_only(grid):
    f = GridFunction.from_callable(grid, np.sin)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_form_resampling_matches_samples(grid):
    form = GaussianProduct((1.0, -0.3), 0.4, 0.8)
    f = GridFunction.from_form(grid, form)
    assert np.max(np.abs(form(grid.x) - f.samples)) <= 1e-12


def test_inner_indicator_against_one(grid):
    f = GridFunction.from_callable(grid, lambda x: ((x >= 0) & (x <= 1)).astype(float))
    one = GridFunction.polynomial(grid, (1.0,))
    # exact integral is 1; trapezoid on a sampled indicator is off by at most 2 dx
    assert abs(inner(f, one) - 1.0) <= 2 * grid.dx


def test_inner_odd_against_even_vanishes(grid):
    f = GridFunction.polynomial(grid, (0.0, 1.0))
    g = GridFunction.from_callable(grid, lambda x: np.exp(-x**2 / 2))
    assert abs(inner(f, g)) <= 1e-12


def test_inner_gaussian_density_integrates_to_one(grid):
    f = GridFunction.from_callable(grid, gauss_pdf)
    one = GridFunction.polynomial(grid, (1.0,))
    assert abs(inner(f, one) - 1.0) <= 1e-10


def test_inner_grid_mismatch(grid):
    other = Grid(-12, 12, 101)
    with pytest.raises(GridMismatchError):
        inner(GridFunction.polynomial(grid, (1.0,)), GridFunction.polynomial(other, (1.0,)))


def test_inner_delta_pairs_pointwise(grid):
    g = GridFunction.from_callable(grid, np.sin)
    d0 = GridFunction.delta(grid, 0.3)
    d1 = GridFunction.delta(grid, 0.3, order=1)
    assert abs(inner(d0, g) - math.sin(0.3)) <= 1e-10
    # <delta', g> = -g'(tau)
    assert abs(inner(d1, g) + math.cos(0.3)) <= 1e-8


def test_inner_delta_outside_grid(grid):
    with pytest.raises(ValueError):
        inner(GridFunction.delta(grid, 20.0), GridFunction.polynomial(grid, (1.0,)))


def test_weighted_sup_norm_examples(grid):
    assert weighted_sup_norm(GridFunction.polynomial(grid, (1.0,)), WeightSpec(0.0)) == 1.0
    f = GridFunction.from_callable(grid, lambda x: 1 + np.abs(x))
    assert abs(weighted_sup_norm(f, WeightSpec(1.0)) - 1.0) <= 1e-15
    g10 = Grid(-10, 10, 2001)
    assert weighted_sup_norm(GridFunction.polynomial(g10, (0.0, 1.0)), 0.0) == 10.0


def test_weighted_l1_norm_examples(grid):
    assert weighted_l1_norm(grid.zeros(), 0.0) == 0.0
    f = GridFunction.from_callable(grid, gauss_pdf)
    assert abs(weighted_l1_norm(f, 0.0) - 1.0) <= 1e-10
    ind = GridFunction.from_callable(grid, lambda x: ((x >= 0) & (x <= 1)).astype(float))
    assert abs(weighted_l1_norm(ind, 1.0) - 1.5) <= 2 * grid.dx


def test_weighted_l1_norm_against_quadrature(grid):
    alpha = 2.0
    f = GridFunction.from_callable(grid, lambda x: np.exp(-(x - 1) ** 2))
    ref, _ = integrate.quad(lambda x: (1 + abs(x)) ** alpha * math.exp(-(x - 1) ** 2), -12, 12, points=[0])
    # the weight has a kink at 0, so the trapezoid rule is only second order
    assert abs(weighted_l1_norm(f, alpha) - ref) <= grid.dx**2


def test_norms_reject_atoms(grid):
    d = GridFunction.delta(grid, 0.0)
    with pytest.raises(ValueError):
        weighted_sup_norm(d, 0.0)
    with pytest.raises(ValueError):
        weighted_l1_norm(d, 0.0)


def test_fd_quadratic_first_derivative_exact(grid):
    f = GridFunction.from_callable(grid, lambda x: x**2)
    d = fd_derivative(f, 1)
    assert np.max(np.abs(d.samples[1:-1] - 2 * grid.x[1:-1])) <= 1e-10


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_fd_constant_vanishes(grid, order):
    f = GridFunction.from_callable(grid, lambda x: np.full_like(x, 3.7))
    assert np.max(np.abs(fd_derivative(f, order).samples)) <= 1e-9


def test_fd_sine_second_derivative(grid):
    f = GridFunction.from_callable(grid, np.sin)
    d = fd_derivative(f, 2)
    assert np.max(np.abs(d.samples[1:-1] + np.sin(grid.x[1:-1]))) <= grid.dx**2


def test_fd_polynomial_form_is_analytic(grid):
    f = GridFunction.polynomial(grid, (1.0, 2.0, 3.0, 4.0))
    d = fd_derivative(f, 2)
    assert d.form == Polynomial((6.0, 24.0))
    assert np.array_equal(d.samples, 6.0 + 24.0 * grid.x)


def test_fd_order_limits():
    small = Grid(0, 1, 5)
    f = GridFunction.from_callable(small, np.sin)
    with pytest.raises(ValueError):
        fd_derivative(f, 3)
    with pytest.raises(ValueError):
        fd_derivative(GridFunction.from_callable(Grid(), np.sin), 5)


def test_delta_has_no_samples_flag(grid):
    d = GridFunction.delta(grid, 0.5, 2.0)
    assert d.is_singular
    assert d.atoms[0] == DeltaAtom(0.5, 2.0, 0)


def test_growth_exponent_of_powers(grid):
    for k in range(4):
        f = GridFunction.polynomial(grid, (0.0,) * k + (1.0,))
        assert abs(growth_exponent(f) - k) <= 0.05
    assert exceeds_growth(GridFunction.polynomial(grid, (0.0, 0.0, 1.0)), 1.0)
    assert not exceeds_growth(GridFunction.polynomial(grid, (0.0, 1.0)), 1.0)


def test_interior_mask(grid):
    mask = interior_mask(grid, 10)
    assert mask.sum() == grid.n - 20 and not mask[9] and mask[10]


_coef = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=30, deadline=None)
@given(a=_coef, b=_coef, c1=st.floats(-3, 3), c2=st.floats(-3, 3), s=st.floats(0.3, 2.0))
def test_inner_symmetric_bilinear(grid, a, b, c1, c2, s):
    f = GridFunction.from_form(grid, GaussianProduct((1.0, 0.5), c1, s))
    g = GridFunction.from_form(grid, GaussianProduct((0.3,), c2, 1.0))
    h = GridFunction.from_callable(grid, lambda x: np.cos(x) * np.exp(-x**2 / 8))
    assert abs(inner(f, g) - inner(g, f)) <= 1e-12 * max(1.0, abs(inner(f, g)))
    lhs = inner(a * f + b * g, h)
    rhs = a * inner(f, h) + b * inner(g, h)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(a) + abs(b))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), lam=_coef, alpha=st.floats(0, 3))
def test_weighted_norms_homogeneous_and_subadditive(grid, seed, lam, alpha):
    rng = np.random.default_rng(seed)
    f = GridFunction(grid, rng.normal(size=grid.n) * np.exp(-grid.x**2 / 10))
    g = GridFunction(grid, rng.normal(size=grid.n) * np.exp(-grid.x**2 / 10))
    for norm in (weighted_sup_norm, weighted_l1_norm):
        nf, ng = norm(f, alpha), norm(g, alpha)
        assert abs(norm(lam * f, alpha) - abs(lam) * nf) <= 1e-12 * max(1.0, abs(lam) * nf)
        assert norm(f + g, alpha) <= (nf + ng) * (1 + 1e-12)
