"""2x2 transfer matrices over piecewise-constant segments and point interactions.

Plane-wave basis: a column vector (A, B) stands for
``psi = A exp(i k x) + B exp(-i k x)`` in local coordinates of a region.
A region below its potential step gets ``k = -i kappa`` so the basis is
(exp(kappa x), exp(-kappa x)).  Matrices act on column vectors and are
composed in the order the wave meets them: the cell matrix is
``T = T_last @ ... @ T_first``.

The cell matrix maps coefficients just right of the node at x = 0 (in the
first segment's basis) to the same point one period later, x = L+.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .lattice import HBAR, MASS, PointInteraction, UnitCell

_ZERO_K = 1e-12


class SingularInterfaceError(ArithmeticError):
    """Wave number vanishes at an interface (energy on a potential threshold)."""


class ModelInconsistencyError(ArithmeticError):
    """Trace of a cell matrix is not real at real energy."""


def wave_number(E: float, U: float = 0.0) -> complex:
    """k = sqrt(2m(E-U))/hbar, or -i kappa below the step."""
    d = 2.0 * MASS * (E - U)
    if d >= 0:
        return complex(math.sqrt(d) / HBAR, 0.0)
    return complex(0.0, -math.sqrt(-d) / HBAR)


def identity() -> np.ndarray:
    return np.eye(2, dtype=complex)


def propagation_matrix(k: complex, width: float) -> np.ndarray:
    if width < 0:
        raise ValueError("width must be non-negative")
    ph = cmath.exp(1j * k * width)
    return np.array([[ph, 0.0], [0.0, cmath.exp(-1j * k * width)]], dtype=complex)


def interface_matrix(k_left: complex, k_right: complex) -> np.ndarray:
    """Continuity of psi and psi' across a step, left basis -> right basis."""
    if abs(k_left) < _ZERO_K or abs(k_right) < _ZERO_K:
        raise SingularInterfaceError("zero wave number at interface")
    r = k_left / k_right
    return 0.5 * np.array([[1 + r, 1 - r], [1 - r, 1 + r]], dtype=complex)


def connection_matrix(pi: PointInteraction) -> np.ndarray:
    """Real connection matrix acting on (psi, psi') across a node.

    psi(0+) = c psi(0-),  psi'(0+) = psi'(0-)/c + g psi(0-)
    with c = (1+b)/(1-b) and g = 2 m alpha / (hbar^2 (1 - b^2)).
    The determinant is exactly 1.
    """
    b = pi.beta_tilde
    c = (1.0 + b) / (1.0 - b)
    g = 2.0 * MASS * pi.alpha / (HBAR**2 * (1.0 - b * b))
    return np.array([[c, 0.0], [g, 1.0 / c]])


def _plane_to_psi(k: complex) -> np.ndarray:
    return np.array([[1.0, 1.0], [1j * k, -1j * k]], dtype=complex)


def _psi_to_plane(k: complex) -> np.ndarray:
    if abs(k) < _ZERO_K:
        raise SingularInterfaceError("zero wave number: plane-wave basis degenerate")
    return 0.5 * np.array([[1.0, 1.0 / (1j * k)], [1.0, -1.0 / (1j * k)]], dtype=complex)


def node_matrix(pi: PointInteraction, k_left: complex, k_right: complex) -> np.ndarray:
    """Point interaction sitting on an interface between two media."""
    if pi.is_trivial:
        return identity() if k_left == k_right else interface_matrix(k_left, k_right)
    return _psi_to_plane(k_right) @ connection_matrix(pi) @ _plane_to_psi(k_left)


def point_interaction_matrix(pi: PointInteraction, E: float, U: float = 0.0) -> np.ndarray:
    """Point interaction embedded in a uniform medium of potential U."""
    k = wave_number(E, U)
    return node_matrix(pi, k, k)


def cell_transfer_matrix(cell: UnitCell, E: float) -> np.ndarray:
    ks = [wave_number(E, seg.height) for seg in cell.segments]
    if any(abs(k) < _ZERO_K for k in ks):
        # on a threshold: go through the (psi, psi') product, which is regular there
        return _psi_to_plane(ks[0]) @ psi_cell_matrix(cell, E) @ _plane_to_psi(ks[0])
    T = propagation_matrix(ks[0], cell.segments[0].width)
    for k_prev, k, seg in zip(ks, ks[1:], cell.segments[1:]):
        T = propagation_matrix(k, seg.width) @ interface_matrix(k_prev, k) @ T
    return node_matrix(cell.node_interaction, ks[-1], ks[0]) @ T


def bloch_rhs_from_trace(T: np.ndarray, tol: float = 1e-8) -> float:
    """F = (T11 + T22)/2; the imaginary residue is checked relative to max(1, |T|)."""
    half = 0.5 * (T[0, 0] + T[1, 1])
    scale = max(1.0, float(np.abs(T).max()))
    if abs(half.imag) > tol * scale:
        raise ModelInconsistencyError(f"complex trace: Im(tr T)/2 = {half.imag:.3e}")
    return float(half.real)


# --- (psi, psi') representation ------------------------------------------------


def psi_propagation(E, U: float, width: float):
    """Real propagator of (psi, psi') through a uniform layer; vectorized over E."""
    E = np.asarray(E, dtype=float)
    d = 2.0 * MASS * (E - U) / HBAR**2
    k = np.sqrt(np.abs(d))
    x = k * width
    osc = d >= 0
    cos_like = np.where(osc, np.cos(x), np.cosh(x))
    # sin(kw)/k and k*sin(kw) with the k -> 0 limit handled by sinc
    s_over_k = np.where(osc, width * np.sinc(x / np.pi), width * _sinhc(x))
    k_s = np.where(osc, -k * np.sin(x), k * np.sinh(x))
    out = np.empty(E.shape + (2, 2))
    out[..., 0, 0] = cos_like
    out[..., 0, 1] = s_over_k
    out[..., 1, 0] = k_s
    out[..., 1, 1] = cos_like
    return out


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(xs) / xs)


def psi_cell_matrix(cell: UnitCell, E):
    """Cell matrix on (psi, psi'), from x = 0+ to x = L+; vectorized over E."""
    E = np.asarray(E, dtype=float)
    T = np.broadcast_to(np.eye(2), E.shape + (2, 2)).copy()
    for seg in cell.segments:
        T = psi_propagation(E, seg.height, seg.width) @ T
    return connection_matrix(cell.node_interaction) @ T


def trace_rhs(cell: UnitCell, E) -> np.ndarray:
    """F(E) from the plane-wave cell matrix, vectorized over E."""
    E_arr = np.atleast_1d(np.asarray(E, dtype=float))
    out = np.empty(E_arr.shape)
    for i, e in enumerate(E_arr):
        try:
            out[i] = bloch_rhs_from_trace(cell_transfer_matrix(cell, float(e)))
        except SingularInterfaceError:
            # reference segment on its threshold; the trace is basis independent
            out[i] = 0.5 * np.trace(psi_cell_matrix(cell, float(e)))
    return out if np.ndim(E) else float(out[0])
