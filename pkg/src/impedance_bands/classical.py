"""Direct Bloch matching for the Kronig-Penney cell: a 4x4 determinant test.

The periodic part u(x) of a Bloch wave is expanded in the well (width a,
wave number k1) on [-a, 0] and in the barrier (width b, k2) on [0, b].
Continuity of u and u' at x = 0 and periodicity u(-a) = u(b), u'(-a) = u'(b)
give M(E, k) (A+, A-, B+, B-)^T = 0, so cos(kL) = F(E) iff det M = 0.

This is a check, not a solver: k is supplied by the dispersion module.
"""

from __future__ import annotations

import numpy as np

from .lattice import HBAR, MASS


def build_matrix(a: float, b: float, U_b: float, E, k) -> np.ndarray:
    """M(E, k); E and k broadcast, giving a stack of shape (..., 4, 4)."""
    E = np.asarray(E, dtype=float)
    k = np.asarray(k, dtype=complex)
    k1 = np.sqrt(2.0 * MASS * E) / HBAR + 0j
    # below the barrier top i k2 = kappa2
    k2 = np.where(E < U_b, -1j * np.sqrt(2.0 * MASS * np.abs(U_b - E)) / HBAR,
                  np.sqrt(2.0 * MASS * np.abs(E - U_b)) / HBAR + 0j)
    k1, k2, k = np.broadcast_arrays(k1, k2, k)
    d1, s1 = k1 - k, k1 + k
    d2, s2 = k2 - k, k2 + k
    e = np.exp
    M = np.empty(k.shape + (4, 4), dtype=complex)
    M[..., 0, :] = (1.0, 1.0, -1.0, -1.0)
    M[..., 1, 0], M[..., 1, 1], M[..., 1, 2], M[..., 1, 3] = k1, -k1, -k2, k2
    M[..., 2, 0] = e(-1j * d1 * a)
    M[..., 2, 1] = e(1j * s1 * a)
    M[..., 2, 2] = -e(1j * d2 * b)
    M[..., 2, 3] = -e(-1j * s2 * b)
    M[..., 3, 0] = d1 * e(-1j * d1 * a)
    M[..., 3, 1] = -s1 * e(1j * s1 * a)
    M[..., 3, 2] = -d2 * e(1j * d2 * b)
    M[..., 3, 3] = s2 * e(-1j * s2 * b)
    return M


def det4(M: np.ndarray):
    d = np.linalg.det(np.asarray(M, dtype=complex))
    return complex(d) if np.ndim(d) == 0 else d


def scaled_residual(M: np.ndarray):
    """|det| after equilibrating columns, then rows, to unit 2-norm.

    The result lies in [0, 1] (Hadamard), so a fixed threshold separates
    roots from non-roots even when the barrier entries span e^{+-kappa b}.
    Works on a single matrix or a stack.
    """
    M = np.asarray(M, dtype=complex)
    M = M / np.linalg.norm(M, axis=-2, keepdims=True)
    M = M / np.linalg.norm(M, axis=-1, keepdims=True)
    r = np.abs(np.linalg.det(M))
    return float(r) if np.ndim(r) == 0 else r


def residual_at(a: float, b: float, U_b: float, E, k):
    """Scaled determinant residual; scalar for scalar E and k, array otherwise."""
    return scaled_residual(build_matrix(a, b, U_b, E, k))
