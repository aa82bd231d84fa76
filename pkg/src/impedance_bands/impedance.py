"""Quantum wave impedance Z = (hbar/(i m)) psi'/psi on a periodic cell.

Inside a uniform segment with wave number k the impedance is
``Z(x) = z0 th(i k x + phi)`` with ``z0 = hbar k / m``; evanescent segments
carry k = -i kappa so the argument becomes kappa x + phi.  Point
interactions act on Z through the affine matching rules below.

The Bloch factor over a cell follows from integrating Z:
``exp(i m/hbar * int_0^L Z dx + f0) = exp(i k L)`` where f0 = ln(psi(0+)/psi(0-))
is the singular contribution of a delta' node.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .lattice import HBAR, MASS, ConfigError, PointInteraction, UnitCell
from .transfer import wave_number

_SATURATE = 350.0
_SATURATED_PHASE = 400.0


class ImpedancePoleError(ArithmeticError):
    """Z is infinite here: psi has a node at this point."""


def th(w: complex) -> complex:
    """tanh via exp(-2|Re w|), saturating to +-1 for |Re w| > 350."""
    w = complex(w)
    if w.real > _SATURATE:
        return 1.0 + 0j
    if w.real < -_SATURATE:
        return -1.0 + 0j
    sign = 1.0 if w.real >= 0 else -1.0
    t = cmath.exp(-2.0 * sign * w)
    den = 1.0 + t
    if abs(den) < 1e-15 * max(1.0, abs(t)):
        raise ImpedancePoleError(f"th pole at argument {w}")
    return sign * (1.0 - t) / den


@dataclass(frozen=True)
class ImpedanceState:
    """Z(x) = z0 th(i k x + phase) on one segment, x measured from its left end."""

    k: complex
    phase: complex

    @property
    def z0(self) -> complex:
        return HBAR * self.k / MASS

    @property
    def kind(self) -> str:
        return "oscillatory" if abs(self.k.imag) <= abs(self.k.real) else "evanescent"

    @classmethod
    def from_impedance(cls, k: complex, Z: complex) -> "ImpedanceState":
        z0 = HBAR * k / MASS
        u = Z / z0
        if abs(1.0 - u) < 1e-14:
            return cls(k, complex(_SATURATED_PHASE))
        if abs(1.0 + u) < 1e-14:
            return cls(k, complex(-_SATURATED_PHASE))
        return cls(k, cmath.atanh(u))


def impedance_at(state: ImpedanceState, x: float) -> complex:
    return state.z0 * th(1j * state.k * x + state.phase)


# --- matching rules ----------------------------------------------------------------


@dataclass(frozen=True)
class Continuous:
    pass


@dataclass(frozen=True)
class DeltaJump:
    """Node of +alpha delta(x)."""

    alpha: float


@dataclass(frozen=True)
class DeltaDeltaPrime:
    """Node of +alpha delta(x) with delta' coupling beta_tilde."""

    alpha: float
    beta_tilde: float


MatchRule = Continuous | DeltaJump | DeltaDeltaPrime


def rule_for(pi: PointInteraction) -> MatchRule:
    if pi.is_trivial:
        return Continuous()
    if pi.beta_tilde == 0.0:
        return DeltaJump(pi.alpha)
    return DeltaDeltaPrime(pi.alpha, pi.beta_tilde)


def apply_match(rule: MatchRule, Z_left: complex, E: float | None = None) -> complex:
    """Z(0+) from Z(0-).

    DeltaJump:        Z+ = Z- - 2i alpha/hbar
    DeltaDeltaPrime:  Z+ = ((1-b)/(1+b))^2 Z- - 2i alpha/(hbar (1+b)^2)
    """
    if isinstance(rule, Continuous):
        return Z_left
    if isinstance(rule, DeltaJump):
        return Z_left - 2j * rule.alpha / HBAR
    b = rule.beta_tilde
    if abs(abs(b) - 1.0) < 1e-15:
        raise ConfigError("beta_tilde = +-1 makes the matching singular")
    return ((1.0 - b) ** 2 / (1.0 + b) ** 2) * Z_left - (2j * rule.alpha / HBAR) / (1.0 + b) ** 2


def log_amplitude_jump(rule: MatchRule) -> float:
    """f0 = ln(psi(0+)/psi(0-)); zero unless the node has a delta' part."""
    if isinstance(rule, DeltaDeltaPrime):
        return math.log((1.0 + rule.beta_tilde) / (1.0 - rule.beta_tilde))
    return 0.0


# --- periodic solutions -------------------------------------------------------------


def _segment_mobius(k: complex, width: float):
    """Z(width) = (A Z0 + B)/(C Z0 + D) from th addition."""
    z0 = HBAR * k / MASS
    kw = k * width
    c = cmath.cos(kw)
    s_over_k = width * (1.0 - kw * kw / 6.0) if abs(kw) < 1e-6 else cmath.sin(kw) / k
    s = cmath.sin(kw)
    return (c, 1j * z0 * s, 1j * s_over_k * MASS / HBAR, c)


def _rule_mobius(rule: MatchRule):
    if isinstance(rule, Continuous):
        return (1.0, 0.0, 0.0, 1.0)
    if isinstance(rule, DeltaJump):
        return (1.0, -2j * rule.alpha / HBAR, 0.0, 1.0)
    b = rule.beta_tilde
    return ((1.0 - b) ** 2, -2j * rule.alpha / HBAR, 0.0, (1.0 + b) ** 2)


def _compose(m2, m1):
    a2, b2, c2, d2 = m2
    a1, b1, c1, d1 = m1
    return (a2 * a1 + b2 * c1, a2 * b1 + b2 * d1, c2 * a1 + d2 * c1, c2 * b1 + d2 * d1)


def periodic_impedances(cell: UnitCell, E: float) -> tuple[complex, complex]:
    """The two values of Z(0+) reproduced after one period (fixed points)."""
    m = (1.0, 0.0, 0.0, 1.0)
    for seg in cell.segments:
        m = _compose(_segment_mobius(wave_number(E, seg.height), seg.width), m)
    m = _compose(_rule_mobius(rule_for(cell.node_interaction)), m)
    A, B, C, D = m
    # C Z^2 + (D - A) Z - B = 0
    bq = D - A
    if abs(C) < 1e-14 * max(abs(A), abs(D), 1.0):
        if abs(bq) < 1e-300:
            raise ImpedancePoleError("degenerate cell map")
        return (B / bq, complex(math.inf))
    disc = cmath.sqrt(bq * bq + 4.0 * C * B)
    q = -0.5 * (bq + disc if (bq.conjugate() * disc).real >= 0 else bq - disc)
    z1 = q / C
    z2 = -B / q if q != 0 else -bq / C - z1
    return (z1, z2)


def periodic_states(cell: UnitCell, E: float, Z0: complex) -> list[ImpedanceState]:
    """Segment states carrying Z(0+) = Z0 across the cell, continuous at interfaces."""
    states = []
    Z = Z0
    for seg in cell.segments:
        st = ImpedanceState.from_impedance(wave_number(E, seg.height), Z)
        states.append(st)
        Z = impedance_at(st, seg.width)
    return states


def cell_bloch_factor(cell: UnitCell, states: list[ImpedanceState], E: float | None = None) -> complex:
    """exp(i m/hbar int Z dx + f0) over one cell.

    Per segment the integral is exact: exp(i m/hbar int_0^w Z) =
    ch(i k w + phi)/ch(phi) = cos(kw) + i sin(kw) th(phi).
    """
    factor = 1.0 + 0j
    for seg, st in zip(cell.segments, states):
        kw = st.k * seg.width
        factor *= cmath.cos(kw) + 1j * cmath.sin(kw) * th(st.phase)
    return factor * math.exp(log_amplitude_jump(rule_for(cell.node_interaction)))


def _apply(m, Z: complex) -> complex:
    A, B, C, D = m
    den = C * Z + D
    if abs(den) < 1e-300:
        raise ImpedancePoleError("psi vanishes at a segment boundary")
    return (A * Z + B) / den


def bloch_factor_from_impedance(cell: UnitCell, E: float, Z0: complex) -> complex:
    """Same integral as ``cell_bloch_factor``, written in Z at each segment start.

    cos(kw) + i sin(kw) th(phi) = cos(kw) + i (m/hbar) (sin(kw)/k) Z(start), which
    stays regular as k -> 0 (E at the bottom of the well or at a barrier top),
    where the phase form degenerates.
    """
    factor = 1.0 + 0j
    Z = Z0
    for seg in cell.segments:
        k = wave_number(E, seg.height)
        kw = k * seg.width
        s_over_k = seg.width * (1.0 - kw * kw / 6.0) if abs(kw) < 1e-6 else cmath.sin(kw) / k
        factor *= cmath.cos(kw) + 1j * (MASS / HBAR) * s_over_k * Z
        Z = _apply(_segment_mobius(k, seg.width), Z)
    return factor * math.exp(log_amplitude_jump(rule_for(cell.node_interaction)))


def impedance_rhs(cell: UnitCell, E: float) -> float:
    """F = (mu_1 + mu_2)/2 over the two periodic impedances.

    The two periodic solutions carry the Bloch factors exp(+-ikL), so their
    mean is cos(kL).  Averaging both keeps F accurate near band edges, where
    the two periodic impedances nearly coincide and each alone is poorly
    determined.  With a single regular solution, (mu + 1/mu)/2 is used.
    """
    mus = []
    last_err: Exception | None = None
    for Z0 in periodic_impedances(cell, E):
        if not cmath.isfinite(Z0):
            continue
        try:
            mu = bloch_factor_from_impedance(cell, E, Z0)
        except ImpedancePoleError as exc:
            last_err = exc
            continue
        if mu != 0 and cmath.isfinite(mu):
            mus.append(mu)
    if not mus:
        raise ImpedancePoleError(f"no regular periodic impedance at E={E}") from last_err
    if len(mus) == 2:
        return float((0.5 * (mus[0] + mus[1])).real)
    return float((0.5 * (mus[0] + 1.0 / mus[0])).real)
