"""Tamm surface states of a semi-infinite Dirac comb, clean and deformed edge.

Geometry (hbar = m = 1, lengths in units of the period L):

    x < 0              vacuum step of height U_E, psi ~ exp(kappa_E x)
    0 <= x < w         optional potential-free spacer (``spacer`` = w)
    x = w              edge delta of strength eta   (p_eta = eta L)
    x = w + n, n >= 1  bulk comb deltas             (p = alpha L)

A bound state needs E < U_E and a quasi-momentum in a gap,
k = i lam + pi n / L.  Matching the vacuum solution to the decaying Bloch
wave gives two equations,

    (-1)^n exp(-lam L) = cos xi + (t + 2 p_eta) sin(xi)/xi      (edge)
    (-1)^n cosh(lam L) = cos xi + p sin(xi)/xi                  (bulk)

with t = xi (q cos xi w - xi sin xi w)/(xi cos xi w + q sin xi w),
q = kappa_E L = sqrt(s^2 - xi^2).  Eliminating lam gives a single
equation in xi whose roots are re-checked against both parents, since the
elimination also admits the growing solution (|mu| > 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bands import BandDiagram, Interval, build_diagram
from .dispersion import dirac_rhs
from .lattice import PointInteraction, SemiInfiniteLattice, energy_of_xi, make_dirac_comb
from .transfer import connection_matrix, psi_cell_matrix, psi_propagation

SCAN_POINTS = 512
EDGE_MARGIN = 1e-9
RESIDUAL_TOL = 1e-10
POLE_GUARD = 1e-8


class SlowDecayWarning(UserWarning):
    """Oracle window reaches so close to a band edge that the state barely decays."""


@dataclass(frozen=True)
class SurfaceState:
    n: int
    xi: float
    lam: float
    E: float
    residual_1: float
    residual_2: float
    p_eta: float = 0.0


def _q(xi, s):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi >= s):
        raise ValueError("xi must stay below s: the state is unbound on the vacuum side")
    return np.sqrt(s * s - xi * xi)


def _xi_cot(xi):
    """xi cot(xi) via cos/sinc, finite at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    return np.cos(xi) / np.sinc(xi / np.pi)


def clean_edge_equation(xi, s: float, p: float):
    """xi ctg(xi) - s^2/(2p) + sqrt(s^2 - xi^2)."""
    q = _q(xi, s)
    out = _xi_cot(xi) - s * s / (2.0 * p) + q
    return float(out) if np.ndim(xi) == 0 else out


def _edge_terms(xi, q, spacer):
    """t and t^2 + xi^2 in trig-product form (no tangent poles)."""
    c1, s1 = np.cos(xi * spacer), np.sin(xi * spacer)
    c2, s2 = np.cos(2 * xi * spacer), np.sin(2 * xi * spacer)
    D = c1 + q * s1 / xi
    N = q * c2 + (q * q - xi * xi) / (2.0 * xi) * s2
    return N / D**2, (q * q + xi * xi) / D**2, D


def edge_rhs(xi, s: float, p_eta: float = 0.0, spacer: float = 0.0):
    """Right-hand side of the edge equation: the Bloch factor exp(ikL) the vacuum side demands."""
    xi = np.asarray(xi, dtype=float)
    q = _q(xi, s)
    t, _, _ = _edge_terms(xi, q, spacer)
    out = np.cos(xi) + (t + 2.0 * p_eta) * np.sin(xi) / xi
    return float(out) if out.ndim == 0 else out


def deformed_edge_equation(xi, s: float, p_alpha: float, p_eta: float, kappa_E_L=None,
                           spacer: float = 0.0, variant: str = "derived"):
    """Residual of the deformed-edge surface-state equation.

    ``variant="derived"``:
        xi ctg xi = 2 (p_eta/p_alpha)(p_eta - p_alpha)
                    + [(q^2 + xi^2)/(2 p_alpha) + (2 p_eta - p_alpha)/p_alpha * N] / D^2
    with D = cos(xi w) + (q/xi) sin(xi w) and
    N = q cos(2 xi w) + (q^2 - xi^2)/(2 xi) sin(2 xi w).  For w = 0 and
    p_eta = 0 it is the clean-edge equation.

    ``variant="printed"`` keeps the historical closed form with the bracket
    (q^2 - xi^2)/(2 xi^2) sin 2xi + (q/xi) cos 2xi over (sin xi + (q/xi) cos xi)^2
    and the coefficient (2 p_eta - p_alpha).  It is kept for comparison
    only: it does not agree with the finite-lattice oracle.

    Returns NaN where |D| < 1e-8.
    """
    xi_arr = np.asarray(xi, dtype=float)
    q = _q(xi_arr, s) if kappa_E_L is None else np.asarray(kappa_E_L, dtype=float)
    lead = 2.0 * (p_eta / p_alpha) * (p_eta - p_alpha)
    if variant == "derived":
        t, t2xi2, D = _edge_terms(xi_arr, q, spacer)
        rhs = lead + (t2xi2 / (2.0 * p_alpha) + (2.0 * p_eta - p_alpha) / p_alpha * t)
    elif variant == "printed":
        D = np.sin(xi_arr) + q / xi_arr * np.cos(xi_arr)
        bracket = (q * q - xi_arr**2) / (2.0 * xi_arr**2) * np.sin(2 * xi_arr) + q / xi_arr * np.cos(2 * xi_arr)
        rhs = lead + ((q * q + xi_arr**2) / (2.0 * p_alpha) + (2.0 * p_eta - p_alpha) * bracket) / D**2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.where(np.abs(D) < POLE_GUARD, np.nan, _xi_cot(xi_arr) - rhs)
    return float(out) if np.ndim(xi) == 0 else out


# --- solving -----------------------------------------------------------------------


def _gap_windows(bulk: BandDiagram, s: float):
    for gap in bulk.gaps:
        lo, hi = gap.xi_lo + EDGE_MARGIN, min(gap.xi_hi, s) - EDGE_MARGIN
        if gap.hi_kind is None and gap.xi_hi < s:
            warnings.warn("bulk diagram ends inside a gap below s; extend xi_max", RuntimeWarning, stacklevel=3)
        if hi > lo:
            yield gap, lo, hi


def _roots_in(fn, lo: float, hi: float) -> list[float]:
    x = np.linspace(lo, hi, SCAN_POINTS)
    with np.errstate(all="ignore"):
        fx = np.asarray(fn(x), dtype=float)
    roots = []
    for i in range(SCAN_POINTS - 1):
        a, b = fx[i], fx[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(x[i]))
        elif a * b < 0:
            roots.append(brentq(lambda t: float(fn(t)), x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return roots


def _verify(xi: float, gap: Interval, mu: float, F: float, L: float, p_eta: float) -> SurfaceState | None:
    sign = -1.0 if gap.n % 2 else 1.0
    if abs(F) <= 1.0 or np.sign(F) != sign:
        return None
    lam_L = math.acosh(abs(F))
    r1 = sign * math.exp(-lam_L) - mu
    r2 = sign * math.cosh(lam_L) - F
    if abs(r1) > RESIDUAL_TOL or abs(r2) > RESIDUAL_TOL * max(1.0, abs(F)):
        return None
    return SurfaceState(gap.n, xi, lam_L / L, energy_of_xi(xi, L), r1, r2, p_eta)


def bulk_diagram(p: float, s: float) -> BandDiagram:
    return build_diagram(lambda x: dirac_rhs(x, p), s * (1 + 1e-9) + 1e-9, params={"model": "dirac", "p": p})


def solve_clean_edge(s: float, p: float, bulk: BandDiagram | None = None, L: float = 1.0) -> list[SurfaceState]:
    if p <= 0:
        raise ValueError("clean-edge surface states need p > 0")
    return solve_deformed_edge(s, p, 0.0, bulk, L, residual=lambda x: clean_edge_equation(x, s, p))


def solve_deformed_edge(s: float, p_alpha: float, p_eta: float, bulk: BandDiagram | None = None,
                        L: float = 1.0, spacer: float = 0.0, variant: str = "derived",
                        residual=None) -> list[SurfaceState]:
    if p_alpha <= 0:
        raise ValueError("surface states need p_alpha > 0")
    if bulk is None:
        bulk = bulk_diagram(p_alpha, s)
    if residual is None:
        residual = lambda x: deformed_edge_equation(x, s, p_alpha, p_eta, spacer=spacer, variant=variant)  # noqa: E731
    states = []
    for gap, lo, hi in _gap_windows(bulk, s):
        for xi in _roots_in(residual, lo, hi):
            mu = edge_rhs(xi, s, p_eta, spacer)
            st = _verify(xi, gap, mu, dirac_rhs(xi, p_alpha), L, p_eta)
            if st is not None:
                states.append(st)
    return sorted(states, key=lambda st: st.xi)


# --- brute-force oracle -----------------------------------------------------------


def semi_infinite_dirac(s: float, p: float, p_eta: float = 0.0, L: float = 1.0, spacer: float = 0.0) -> SemiInfiniteLattice:
    return SemiInfiniteLattice(
        make_dirac_comb(p, L), energy_of_xi(s, L), PointInteraction(p_eta / L, 0.0), spacer
    )


def _oracle_residual(lattice: SemiInfiniteLattice, N: int, E: np.ndarray) -> np.ndarray:
    """Boundary-system determinant: vacuum solution after N cells wedge the decaying Bloch vector.

    Each step is divided by |mu_growing| (a positive scalar per energy), so
    the determinant stays O(1) and smooth; it vanishes exactly where the
    growing component of the propagated vacuum solution does.
    """
    E = np.asarray(E, dtype=float)
    kappa = np.sqrt(2.0 * (lattice.left_barrier_U_E - E))
    v = np.stack([np.ones_like(E), kappa], axis=-1)[..., None]
    L = lattice.bulk.L
    if lattice.edge_spacer > 0:
        v = psi_propagation(E, 0.0, lattice.edge_spacer * L) @ v
    v = connection_matrix(lattice.edge_interaction) @ v
    v = v / np.linalg.norm(v, axis=-2, keepdims=True)

    T = psi_cell_matrix(lattice.bulk, E)
    half_tr = 0.5 * (T[..., 0, 0] + T[..., 1, 1])
    root = np.sqrt(np.maximum(half_tr**2 - 1.0, 0.0))
    mu_g = half_tr + np.sign(half_tr) * root
    mu_d = 1.0 / mu_g
    scale = np.abs(mu_g)[..., None, None]
    for _ in range(N):
        v = (T @ v) / scale
    v = v[..., 0]

    u1 = np.stack([T[..., 0, 1], mu_d - T[..., 0, 0]], axis=-1)
    u2 = np.stack([mu_d - T[..., 1, 1], T[..., 1, 0]], axis=-1)
    n1 = np.linalg.norm(u1, axis=-1)
    n2 = np.linalg.norm(u2, axis=-1)
    u = np.where((n1 >= n2)[..., None], u1 / n1[..., None], u2 / n2[..., None])
    return v[..., 0] * u[..., 1] - v[..., 1] * u[..., 0]


def finite_lattice_oracle(lattice: SemiInfiniteLattice, N: int, E_window: tuple[float, float],
                          scan: int = 2048) -> list[float]:
    """Bound-state energies in a bulk gap by explicit N-cell propagation.

    The vacuum solution is carried through the edge and N bulk cells and
    must arrive as the decaying Bloch solution: the coefficient of the
    growing one vanishes.  Zeros of that 2x2 determinant are located on a
    grid and refined; sign flips caused by switching between the two
    equivalent eigenvector formulas are discarded because the determinant
    does not vanish there.
    """
    if N < 20:
        raise ValueError("oracle needs N >= 20 cells")
    lo, hi = E_window
    if not hi > lo:
        return []
    T = psi_cell_matrix(lattice.bulk, np.array([lo, hi]))
    ends = np.abs(0.5 * (T[..., 0, 0] + T[..., 1, 1]))
    if np.any(ends <= 1.0):
        raise ValueError("oracle window must lie inside a bulk gap")
    if np.min(np.arccosh(ends)) * N < 10:
        warnings.warn("window touches a band edge: slow decay into the bulk", SlowDecayWarning, stacklevel=2)
    E = np.linspace(lo, hi, scan)
    f = _oracle_residual(lattice, N, E)

    def scalar(e):
        return float(_oracle_residual(lattice, N, np.array([e]))[0])

    roots = []
    for i in range(scan - 1):
        if f[i] * f[i + 1] < 0:
            r = brentq(scalar, E[i], E[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            if abs(scalar(r)) < 1e-8:
                roots.append(r)
    return roots


def gap_energy_window(gap: Interval, U_E: float, L: float) -> tuple[float, float]:
    lo = energy_of_xi(gap.xi_lo + EDGE_MARGIN, L)
    hi = min(energy_of_xi(gap.xi_hi - EDGE_MARGIN, L), U_E * (1 - 1e-12))
    return lo, hi
