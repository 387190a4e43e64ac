"""Pure numpy implementations of the hot kernels."""
import math

import numpy as np


def green_sums(q, dx, m):
    """Discrete Green's convolution ``S_i = sum_{j != i} rho_m(x_i - x_j) q_j``.

    ``rho_m(t) = sign(t) t**(m-1) / (2 (m-1)!)`` and the nodes are spaced ``dx``
    apart. Computed as a full Toeplitz product in O(n**2).
    """
    q = np.ascontiguousarray(q, dtype=float)
    n = q.shape[0]
    k = np.arange(-(n - 1), n, dtype=float) * dx
    tab = 0.5 * np.sign(k) * k ** (m - 1) / math.factorial(m - 1)
    return np.convolve(q, tab)[n - 1 : 2 * n - 1]
