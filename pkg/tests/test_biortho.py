import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nativespace import (
    GaussianProduct,
    GridFunction,
    Polynomial,
    apply_adjoint,
    change_of_basis,
    delta_system,
    gaussian_system,
    hermite_gaussian_system,
    make_biortho_system,
    make_derivative_operator,
    nullspace_norm,
    proj_np,
    proj_nphi,
    projector_bound,
)
from nativespace.biortho import DivergentMomentError, NotBiorthogonalError, projector_checks


def pdf(grid, shift=0.0):
    return GridFunction.from_form(grid, GaussianProduct((1 / math.sqrt(2 * math.pi),), shift, 1.0))


def one(grid):
    return GridFunction.polynomial(grid, (1.0,))


def test_single_gaussian_accepted(grid):
    sys = make_biortho_system([pdf(grid)], [one(grid)])
    assert abs(sys.gram[0, 0] - 1.0) <= 1e-10


def test_unnormalized_gaussian_rejected(grid):
    phi = GridFunction.from_callable(grid, lambda x: np.exp(-x**2 / 2))
    with pytest.raises(NotBiorthogonalError) as info:
        make_biortho_system([phi], [one(grid)])
    assert abs(info.value.gram[0, 0] - math.sqrt(2 * math.pi)) <= 1e-10


def test_length_mismatch(grid):
    with pytest.raises(ValueError):
        make_biortho_system([pdf(grid)], [one(grid), GridFunction.polynomial(grid, (0.0, 1.0))])


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_hermite_gaussian_gram(grid, m):
    sys = hermite_gaussian_system(grid, m)
    assert np.max(np.abs(sys.gram - np.eye(m))) <= 1e-6


def test_hermite_pair_uses_normalized_hermite(grid):
    sys = hermite_gaussian_system(grid, 2)
    c = 1 / math.sqrt(math.sqrt(2 * math.pi))
    assert np.allclose(sys.ps[0].samples, c)
    assert np.allclose(sys.ps[1].samples, c * grid.x)


def test_proj_np_examples(grid):
    sys = gaussian_system(grid, 2)
    p = GridFunction.polynomial(grid, (0.7, -1.3))
    assert np.allclose(sys.coefficients(proj_np(sys, p)), sys.coefficients(p), atol=1e-8)
    assert isinstance(proj_np(sys, p).form, Polynomial)
    sys1 = gaussian_system(grid, 1)
    assert np.max(np.abs(proj_np(sys1, GridFunction.polynomial(grid, (0.0, 1.0))).samples)) <= 1e-12
    sq = proj_np(sys1, GridFunction.polynomial(grid, (0.0, 0.0, 1.0)))
    assert np.max(np.abs(sq.samples - 1.0)) <= 1e-10


def test_proj_nphi_examples(grid):
    sys = hermite_gaussian_system(grid, 2)
    for phi in sys.phis:
        assert np.max(np.abs(proj_nphi(sys, phi).samples - phi.samples)) <= 1e-8
    psi = GridFunction.from_form(grid, GaussianProduct((1.0,), 0.4, 0.9))
    g = apply_adjoint(make_derivative_operator(2), psi)
    assert np.max(np.abs(proj_nphi(sys, g).samples)) <= 1e-6
    assert np.max(np.abs(proj_nphi(sys, grid.zeros()).samples)) == 0.0


def test_proj_nphi_divergent_moment(grid):
    sys = hermite_gaussian_system(grid, 2)
    with pytest.raises(DivergentMomentError):
        proj_nphi(sys, one(grid))


def test_nullspace_norm_examples(grid):
    sys = hermite_gaussian_system(grid, 2)
    p1, p2 = sys.ps
    assert abs(nullspace_norm(sys, p1) - 1.0) <= 1e-10
    assert abs(nullspace_norm(sys, 3 * p1 + 4 * p2) - 5.0) <= 1e-9
    assert nullspace_norm(sys, grid.zeros()) == 0.0
    with pytest.raises(ValueError):
        nullspace_norm(sys, GridFunction.polynomial(grid, (0.0, 0.0, 1.0)))


def test_change_of_basis_identity(grid):
    sys = hermite_gaussian_system(grid, 3)
    _, cob = change_of_basis(sys, sys.phis)
    assert np.allclose(cob.C, np.eye(3), atol=1e-12)
    assert abs(cob.B1 - 1 / math.sqrt(3)) <= 1e-10 and abs(cob.B2 - math.sqrt(3)) <= 1e-10


def test_change_of_basis_scaling(grid):
    sys = gaussian_system(grid, 1)
    new, cob = change_of_basis(sys, [2 * sys.phis[0]])
    assert np.allclose(cob.C, [[2.0]])
    assert np.allclose(new.ps[0].samples, 0.5)
    # B1 = 1/||C^-1||_F = 2: the bounds collapse onto the exact ratio 2
    assert abs(cob.B1 - 2.0) <= 1e-12 and abs(cob.B2 - 2.0) <= 1e-12


def test_change_of_basis_shifted_gaussian(grid):
    sys = gaussian_system(grid, 2)
    shifted = gaussian_system(grid, 2, shift=0.5)
    new, cob = change_of_basis(sys, shifted.phis)
    # first shifted functional is a unit-mass Gaussian at 0.5, so it sees x as 0.5
    assert abs(cob.C[0, 1] - 0.5) <= 1e-10
    assert abs(cob.B2 - np.linalg.norm(cob.C, "fro")) <= 1e-8
    assert abs(cob.B1 - 1 / np.linalg.norm(np.linalg.inv(cob.C), "fro")) <= 1e-8
    assert np.allclose(cob.C @ cob.B, np.eye(2), atol=1e-10)
    assert np.max(np.abs(new.gram - np.eye(2))) <= 1e-6


def test_change_of_basis_singular(grid):
    sys = gaussian_system(grid, 2)
    with pytest.raises(ValueError):
        change_of_basis(sys, [sys.phis[0], sys.phis[0]])


def test_projector_bound_examples(grid):
    assert projector_bound(gaussian_system(grid, 1), 0.0) == pytest.approx(1.0)
    assert projector_bound(None, 0.0) == 0.0
    # x/(1+|x|) peaks at the grid end, 12/13, so the bound is just under sqrt 2
    expected = math.sqrt(1 + (12 / 13) ** 2)
    assert abs(projector_bound(gaussian_system(grid, 2), 1.0) - expected) <= 1e-12


def test_delta_system(grid):
    sys = delta_system(grid, 3)
    assert sys.has_atoms
    assert np.max(np.abs(sys.gram - np.eye(3))) <= 1e-8
    f = GridFunction.polynomial(grid, (1.0, 2.0, 3.0))
    # phi_n(f) = f^(n-1)(0) against p_n = x^(n-1)/(n-1)!
    assert np.allclose(sys.coefficients(f), [1.0, 2.0, 6.0], atol=1e-8)


@pytest.mark.parametrize("factory", [hermite_gaussian_system, gaussian_system])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_projector_algebra(grid, factory, m):
    report = projector_checks(factory(grid, m), trials=20, seed=m)
    assert report.passed, report.failures


def test_projector_checks_rejects_zero_trials(grid):
    with pytest.raises(ValueError):
        projector_checks(hermite_gaussian_system(grid, 1), trials=0)


@settings(max_examples=30, deadline=None)
@given(coeffs=st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_proj_np_reproduces_null_space(grid, coeffs):
    sys = hermite_gaussian_system(grid, 2)
    p = GridFunction.polynomial(grid, coeffs)
    back = proj_np(sys, p)
    scale = max(1.0, max(abs(c) for c in coeffs))
    got = np.zeros(2)
    got[: len(back.form.coeffs)] = back.form.coeffs
    assert np.max(np.abs(got - np.asarray(coeffs))) <= 1e-8 * scale
