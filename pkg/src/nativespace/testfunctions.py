"""Random closed-form test functions for identity checks."""
from __future__ import annotations

import numpy as np

from .gridfn import GaussianProduct, Grid, GreenAtom, GridFunction, Polynomial, Sum

__all__ = ["random_mixture", "random_null_polynomial", "random_green_sum"]


def random_mixture(
    rng: np.random.Generator,
    grid: Grid,
    components: int = 3,
    center_range: float = 3.0,
    width_range: tuple = (0.5, 1.5),
) -> GridFunction:
    """Sum of Gaussian bumps with random centres, widths, amplitudes and linear tilts."""
    terms = []
    for _ in range(components):
        mu = rng.uniform(-center_range, center_range)
        s = rng.uniform(*width_range)
        coeffs = (rng.normal(), 0.5 * rng.normal())
        terms.append(GaussianProduct(coeffs, mu, s))
    return GridFunction.from_form(grid, Sum(tuple(terms)))


def random_null_polynomial(rng: np.random.Generator, grid: Grid, m: int, scale: float = 1.0) -> GridFunction:
    """Random polynomial of degree below ``m``."""
    return GridFunction.from_form(grid, Polynomial(tuple(scale * rng.normal(size=m))))


def random_green_sum(
    rng: np.random.Generator,
    grid: Grid,
    m: int,
    knots: int = 3,
    knot_range: float = 3.0,
    with_polynomial: bool = True,
) -> GridFunction:
    """Random L-spline: Green atoms of order ``m`` plus an optional null-space polynomial."""
    terms = [
        GreenAtom(m, float(rng.uniform(-knot_range, knot_range)), float(rng.normal()))
        for _ in range(knots)
    ]
    if with_polynomial:
        terms.append(Polynomial(tuple(rng.normal(size=m))))
    return GridFunction.from_form(grid, Sum(tuple(terms)))
