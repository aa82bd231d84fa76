"""Right-hand sides F of the Bloch condition cos(kL) = F for the three models.

All functions are vectorized over their first argument.  The xi -> 0 and
E -> U_b limits are taken through sinc-type factors so no branch divides
by zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .lattice import HBAR, MASS, ConfigError


def _sinc(x):
    """sin(x)/x with the limit 1 at x = 0."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(xs) / xs)


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def dirac_rhs(xi, p: float):
    """cos(xi) + (p/xi) sin(xi) for a comb of +alpha delta nodes, p = m alpha L / hbar^2."""
    xi_arr = np.asarray(xi, dtype=float)
    F = np.cos(xi_arr) + p * _sinc(xi_arr)
    return _out(F, xi)


def delta_delta_prime_rhs(xi, p: float, beta_tilde: float):
    """Comb of -alpha delta + beta delta' nodes.

    F = (1+b^2)/(1-b^2) * [cos(xi) - p/(xi (1+b^2)) sin(xi)].
    With b = 0 this is exactly ``dirac_rhs(xi, -p)``.
    """
    if abs(abs(beta_tilde) - 1.0) < 1e-15:
        raise ConfigError("beta_tilde = +-1 makes the matching singular")
    xi_arr = np.asarray(xi, dtype=float)
    b2 = beta_tilde * beta_tilde
    pref = (1.0 + b2) / (1.0 - b2)
    F = pref * (np.cos(xi_arr) + (-p / (1.0 + b2)) * _sinc(xi_arr))
    return _out(F, xi)


def kronig_penney_rhs(E, a: float, b: float, U_b: float):
    """Kronig-Penney F(E) for a well of width a and a barrier (b, U_b).

    One expression covers E < U_b, E = U_b and E > U_b: with
    q2 = 2m(U_b - E)/hbar^2 the barrier factors are cosh/sinh for q2 > 0 and
    cos/sin for q2 < 0, and

        F = cos(k1 a) C + (q2 - k1^2)/2 * [sin(k1 a)/k1] * [S/q]

    which is the familiar cos ch + (kappa^2 - k1^2)/(2 k1 kappa) sin sh.
    """
    E_arr = np.asarray(E, dtype=float)
    if np.any(E_arr < 0):
        raise ValueError("kronig_penney_rhs needs E >= 0")
    k1 = np.sqrt(2.0 * MASS * E_arr) / HBAR
    q2 = 2.0 * MASS * (U_b - E_arr) / HBAR**2
    q = np.sqrt(np.abs(q2))
    under = q2 >= 0
    C = np.where(under, np.cosh(q * b), np.cos(q * b))
    S_over_q = b * np.where(under, _sinhc(q * b), _sinc(q * b))
    sin_over_k1 = a * _sinc(k1 * a)
    F = np.cos(k1 * a) * C + 0.5 * (q2 - k1 * k1) * sin_over_k1 * S_over_q
    return _out(F, E)


def kronig_penney_rhs_xi(xi, a: float, b: float, U_b: float):
    L = a + b
    return kronig_penney_rhs((HBAR * np.asarray(xi, dtype=float) / L) ** 2 / (2 * MASS), a, b, U_b)


# --- classification --------------------------------------------------------------


class Zone(enum.Enum):
    ALLOWED = "allowed"
    FORBIDDEN = "forbidden"


@dataclass(frozen=True)
class QuasiMomentum:
    """k = k_real + i lam.  In a gap k_real = pi n / L with parity of n fixed by sign F."""

    k_real: float
    lam: float
    n: int | None
    band_edge: bool = False

    @property
    def k(self) -> complex:
        return complex(self.k_real, self.lam)


@dataclass(frozen=True)
class DispersionSample:
    E: float
    xi: float
    F: float
    zone: Zone
    k: QuasiMomentum


def classify(F: float) -> Zone:
    return Zone.ALLOWED if abs(F) <= 1.0 else Zone.FORBIDDEN


def k_of_F(F: float, L: float, n: int | None = None) -> QuasiMomentum:
    """Invert cos(kL) = F.

    In a band k = arccos(F)/L in [0, pi/L].  In a gap k = i lam + pi n/L with
    lam = arccosh(|F|)/L > 0; ``n`` defaults to the lowest zone of the right
    parity (0 for F > 1, 1 for F < -1) and must match (-1)^n = sign(F).
    """
    if abs(F) <= 1.0:
        return QuasiMomentum(math.acos(F) / L, 0.0, None, band_edge=abs(F) == 1.0)
    parity = 0 if F > 0 else 1
    if n is None:
        n = parity
    elif n % 2 != parity:
        raise ValueError(f"zone {n} has the wrong parity for F = {F}")
    return QuasiMomentum(math.pi * n / L, math.acosh(abs(F)) / L, n)


def sample(F_of_E, E: float, L: float) -> DispersionSample:
    F = float(F_of_E(E))
    return DispersionSample(E, math.sqrt(2 * MASS * E) * L / HBAR, F, classify(F), k_of_F(F, L))
