"""Bloch waves and impedance profiles of the Dirac comb from the closed-form cell solution.

Inside cell n (nL <= x < (n+1)L) the wave is

    psi(x) = A (exp(i k0 y) + r0 exp(-i k0 y)) exp(i k n L),   y = x - nL

and continuity at the next node fixes r0.  The derivative jump at the
nodes then holds automatically whenever cos(kL) = cos(xi) + p sin(xi)/xi.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dispersion import dirac_rhs
from .lattice import HBAR, MASS

POLE_TOL = 1e-12
_DEGENERATE = 1e-14


class BandEdgeWarning(UserWarning):
    """The energy sits exactly on a band edge; the Bloch wave is a standing wave."""


def r0_of(xi: float, kL: complex) -> complex:
    """(exp(i(xi - kL)) - 1)/(1 - exp(-i(xi + kL))); 0 when the denominator degenerates."""
    num = cmath.exp(1j * (xi - kL)) - 1.0
    den = 1.0 - cmath.exp(-1j * (xi + kL))
    if abs(den) < _DEGENERATE:
        return 0j
    return num / den


@dataclass(frozen=True)
class BlochWave:
    r0: complex
    k: complex
    k0: float
    L: float
    A: complex

    @property
    def bloch_factor(self) -> complex:
        return cmath.exp(1j * self.k * self.L)

    @property
    def z0(self) -> float:
        return HBAR * self.k0 / MASS


def _cell_max_abs(r0: complex, k0: float, L: float) -> float:
    # |e^{i k0 y} + r e^{-i k0 y}|^2 = 1 + |r|^2 + 2|r| cos(2 k0 y - arg r)
    ys = [0.0, L]
    if abs(r0) > 0 and k0 > 0:
        phase = cmath.phase(r0)
        m = math.ceil((0.0 - phase) / (2 * math.pi))
        while True:
            y = (phase + 2 * math.pi * m) / (2 * k0)
            if y > L:
                break
            ys.append(y)
            m += 1
    return max(abs(cmath.exp(1j * k0 * y) + r0 * cmath.exp(-1j * k0 * y)) for y in ys)


def make_wave(r0: complex, kL: complex, xi: float, L: float = 1.0) -> BlochWave:
    k0 = xi / L
    return BlochWave(r0, kL / L, k0, L, 1.0 / _cell_max_abs(r0, k0, L))


def dirac_bloch_wave(xi: float, p: float, L: float = 1.0, allow_gap: bool = False) -> BlochWave:
    """Bloch wave of the +alpha delta comb at xi = k0 L > 0.

    In a band kL = arccos F in [0, pi] (if that branch makes the cell
    solution degenerate, the time-reversed partner -kL is used).  In a gap,
    with ``allow_gap``, kL = pi n + i lam L: the solution decaying to the right.
    """
    if not xi > 0:
        raise ValueError("xi must be positive")
    F = float(dirac_rhs(xi, p))
    if abs(F) == 1.0:
        warnings.warn("energy on a band edge", BandEdgeWarning, stacklevel=2)
    if abs(F) <= 1.0:
        kL: complex = math.acos(F)
        if abs(1.0 - cmath.exp(-1j * (xi + kL))) < _DEGENERATE and abs(cmath.exp(1j * (xi - kL)) - 1.0) > _DEGENERATE:
            kL = -kL
    elif allow_gap:
        kL = complex(0.0 if F > 0 else math.pi, math.acosh(abs(F)))
    else:
        raise ValueError(f"xi = {xi} lies in a gap (F = {F}); pass allow_gap for the decaying solution")
    return make_wave(r0_of(xi, kL), kL, xi, L)


def _split(wave: BlochWave, x):
    x = np.asarray(x, dtype=float)
    n = np.floor(x / wave.L)
    return n, x - n * wave.L


def psi_at(wave: BlochWave, x):
    n, y = _split(wave, x)
    out = wave.A * (np.exp(1j * wave.k0 * y) + wave.r0 * np.exp(-1j * wave.k0 * y)) * np.exp(1j * wave.k * n * wave.L)
    return complex(out) if np.ndim(x) == 0 else out


def dpsi_at(wave: BlochWave, x):
    """Analytic psi'(x); at a node this is the right-hand limit."""
    n, y = _split(wave, x)
    out = (1j * wave.k0 * wave.A * (np.exp(1j * wave.k0 * y) - wave.r0 * np.exp(-1j * wave.k0 * y))
           * np.exp(1j * wave.k * n * wave.L))
    return complex(out) if np.ndim(x) == 0 else out


def pole_mask(wave: BlochWave, x):
    """True at nodes of psi, judged on the cell-local amplitude (gap decay is not a node)."""
    _, y = _split(wave, x)
    return np.abs(wave.A * (np.exp(1j * wave.k0 * y) + wave.r0 * np.exp(-1j * wave.k0 * y))) < POLE_TOL


def impedance_profile(wave: BlochWave, x):
    """Z(x) = z0 (e - r0 e*)/(e + r0 e*), e = exp(i k0 y); NaN where |psi| < 1e-12.

    Z depends only on y, so it is strictly L-periodic.
    """
    _, y = _split(wave, x)
    e = np.exp(1j * wave.k0 * y)
    em = np.exp(-1j * wave.k0 * y)
    den = e + wave.r0 * em
    with np.errstate(all="ignore"):
        Z = wave.z0 * (e - wave.r0 * em) / den
    Z = np.where(pole_mask(wave, x), np.nan + 0j, Z)
    return complex(Z) if np.ndim(x) == 0 else Z


def sample_rows(wave: BlochWave, n_cells: int, samples_per_cell: int) -> list[dict]:
    """Columns x, re_psi, im_psi, abs_psi2, re_Z, im_Z over [0, n_cells L]."""
    if n_cells < 1 or samples_per_cell < 2:
        raise ValueError("need n_cells >= 1 and samples_per_cell >= 2")
    x = np.linspace(0.0, n_cells * wave.L, n_cells * samples_per_cell + 1)
    psi = psi_at(wave, x)
    Z = impedance_profile(wave, x)
    return [
        {"x": xi, "re_psi": ps.real, "im_psi": ps.imag, "abs_psi2": abs(ps) ** 2, "re_Z": z.real, "im_Z": z.imag}
        for xi, ps, z in zip(x.tolist(), psi.tolist(), Z.tolist())
    ]
