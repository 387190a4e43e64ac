# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels."""
import numpy as np


def green_sums(const double[::1] q, double dx, int m):
    """Discrete Green's convolution ``S_i = sum_{j != i} rho_m(x_i - x_j) q_j``.

    Uses the moment recurrence
    ``A_k(i+1) = sum_{l<=k} dx**(k-l)/(k-l)! A_l(i) + dx**k/k! q_i`` with
    ``A_k(i) = sum_{j<i} ((i-j) dx)**k / k! q_j``, and its mirror image for the
    right-hand sums. All coefficients are positive, so there is no cancellation.
    Cost is O(n m**2).
    """
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i
    cdef int k, l
    cdef double c[8]
    cdef double A[8]
    cdef double An[8]
    cdef double sgn = 1.0 if m % 2 == 0 else -1.0
    if m < 1 or m > 8:
        raise ValueError("order must lie in 1..8")
    c[0] = 1.0
    for k in range(1, m):
        c[k] = c[k - 1] * dx / k
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for k in range(m):
        A[k] = 0.0
    for i in range(n):
        o[i] = 0.5 * A[m - 1]
        for k in range(m):
            An[k] = c[k] * q[i]
            for l in range(k + 1):
                An[k] += c[k - l] * A[l]
        for k in range(m):
            A[k] = An[k]
    for k in range(m):
        A[k] = 0.0
    for i in range(n - 1, -1, -1):
        o[i] += sgn * 0.5 * A[m - 1]
        for k in range(m):
            An[k] = c[k] * q[i]
            for l in range(k + 1):
                An[k] += c[k - l] * A[l]
        for k in range(m):
            A[k] = An[k]
    return out
