"""Lattice geometry and potential data shared by every solver.

Units: hbar = m = 1 throughout.  The dimensionless groups used by the
solvers are

    xi   = k0 * L         with k0 = sqrt(2 E)
    p    = alpha * L      (point-interaction strength)
    s    = sqrt(2 U_E) * L  (vacuum barrier scale)

A point interaction with ``alpha > 0`` is a repulsive ``+alpha * delta``
term in the potential.  ``beta_tilde`` is the dimensionless delta-prime
coupling entering the amplitude jump psi(0+) = (1+b)/(1-b) psi(0-).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

HBAR = 1.0
MASS = 1.0

_WIDTH_RTOL = 1e-12


class ConfigError(ValueError):
    """Invalid lattice parameters or configuration file."""


@dataclass(frozen=True)
class PointInteraction:
    alpha: float = 0.0
    beta_tilde: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or not math.isfinite(self.beta_tilde):
            raise ConfigError("point interaction strengths must be finite")
        if abs(abs(self.beta_tilde) - 1.0) < 1e-15:
            raise ConfigError("beta_tilde = +-1 makes the matching singular")

    @property
    def is_trivial(self) -> bool:
        return self.alpha == 0.0 and self.beta_tilde == 0.0

    @property
    def amplitude_jump(self) -> float:
        """Ratio psi(0+)/psi(0-)."""
        return (1.0 + self.beta_tilde) / (1.0 - self.beta_tilde)


@dataclass(frozen=True)
class PotentialSegment:
    width: float
    height: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError(f"segment width must be positive, got {self.width}")


@dataclass(frozen=True)
class UnitCell:
    """One period [0, L): node interaction at x = 0, then the segments."""

    segments: tuple[PotentialSegment, ...]
    node_interaction: PointInteraction = field(default_factory=PointInteraction)
    period_L: float | None = None

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ConfigError("a unit cell needs at least one segment")
        object.__setattr__(self, "segments", segs)
        total = math.fsum(s.width for s in segs)
        if self.period_L is None:
            object.__setattr__(self, "period_L", total)
        if not self.period_L > 0:
            raise ConfigError("period must be positive")
        if abs(total - self.period_L) > _WIDTH_RTOL * self.period_L:
            raise ConfigError(
                f"segment widths sum to {total}, period is {self.period_L}"
            )

    @property
    def L(self) -> float:
        return self.period_L

    @property
    def thresholds(self) -> tuple[float, ...]:
        return tuple(sorted({s.height for s in self.segments}))


@dataclass(frozen=True)
class SemiInfiniteLattice:
    """Step of height ``left_barrier_U_E`` on x < 0, bulk cells for x > 0.

    ``edge_spacer`` (in units of L, default 0) is a potential-free layer
    between the step and ``edge_interaction``, which sits at x = spacer*L;
    the bulk nodes follow at spacer*L + n*L, n >= 1.
    """

    bulk: UnitCell
    left_barrier_U_E: float
    edge_interaction: PointInteraction = field(default_factory=PointInteraction)
    edge_spacer: float = 0.0

    def __post_init__(self):
        if self.edge_spacer < 0:
            raise ConfigError("edge spacer must be non-negative")

    @property
    def s(self) -> float:
        return math.sqrt(2.0 * MASS * self.left_barrier_U_E) * self.bulk.L / HBAR

    def kappa_E(self, E: float) -> float:
        if E >= self.left_barrier_U_E:
            raise ValueError("energy above the vacuum step: state is not bound")
        return math.sqrt(2.0 * MASS * (self.left_barrier_U_E - E)) / HBAR


def make_dirac_comb(p: float, L: float = 1.0) -> UnitCell:
    if not L > 0:
        raise ConfigError("period must be positive")
    alpha = p * HBAR**2 / (MASS * L)
    return UnitCell((PotentialSegment(L, 0.0),), PointInteraction(alpha, 0.0), L)


def make_delta_delta_prime_comb(p: float, beta_tilde: float, L: float = 1.0) -> UnitCell:
    """Comb of ``-alpha delta + beta delta'`` nodes, p = alpha L.

    The sign follows the usual delta-delta' comb convention (attractive
    delta part for p > 0), so ``beta_tilde = 0`` gives the Dirac comb with
    strength ``-p``.
    """
    if not L > 0:
        raise ConfigError("period must be positive")
    alpha = -p * HBAR**2 / (MASS * L)
    return UnitCell((PotentialSegment(L, 0.0),), PointInteraction(alpha, beta_tilde), L)


def make_kronig_penney(a: float, b: float, U_b: float) -> UnitCell:
    if not (a > 0 and b > 0):
        raise ConfigError(f"well and barrier widths must be positive, got a={a}, b={b}")
    return UnitCell((PotentialSegment(a, 0.0), PotentialSegment(b, U_b)), PointInteraction(), a + b)


def xi_of_energy(E, L: float):
    """xi = k0 L.  Accepts scalars or arrays."""
    E_arr = np.asarray(E, dtype=float)
    if np.any(E_arr < 0):
        raise ValueError("xi_of_energy needs E >= 0")
    out = np.sqrt(2.0 * MASS * E_arr) * L / HBAR
    return float(out) if out.ndim == 0 else out


def energy_of_xi(xi, L: float):
    xi_arr = np.asarray(xi, dtype=float)
    out = (HBAR * xi_arr / L) ** 2 / (2.0 * MASS)
    return float(out) if out.ndim == 0 else out


# --- configuration files -----------------------------------------------------

MODELS = ("dirac", "delta-delta-prime", "kronig-penney")
CONFIG_KEYS = frozenset({"model", "p", "beta_tilde", "a", "b", "U_b", "L", "U_E", "eta"})


@dataclass(frozen=True)
class LatticeConfig:
    model: str
    p: float = 0.0
    beta_tilde: float = 0.0
    a: float = 1.0
    b: float = 1.0
    U_b: float = 0.0
    L: float = 1.0
    U_E: float | None = None
    eta: float = 0.0

    @property
    def period(self) -> float:
        return self.a + self.b if self.model == "kronig-penney" else self.L

    def unit_cell(self) -> UnitCell:
        if self.model == "dirac":
            return make_dirac_comb(self.p, self.L)
        if self.model == "delta-delta-prime":
            return make_delta_delta_prime_comb(self.p, self.beta_tilde, self.L)
        return make_kronig_penney(self.a, self.b, self.U_b)

    @property
    def s(self) -> float:
        if self.U_E is None:
            raise ConfigError("U_E is required for surface states")
        return math.sqrt(2.0 * MASS * self.U_E) * self.period / HBAR

    @property
    def p_eta(self) -> float:
        return MASS * self.eta * self.period / HBAR**2

    def semi_infinite(self) -> SemiInfiniteLattice:
        if self.U_E is None:
            raise ConfigError("U_E is required for a semi-infinite lattice")
        return SemiInfiniteLattice(self.unit_cell(), self.U_E, PointInteraction(self.eta, 0.0))


def config_from_mapping(data: Mapping[str, Any]) -> LatticeConfig:
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if data.get("model") not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got {data.get('model')!r}")
    kwargs: dict[str, Any] = {"model": data["model"]}
    for key in CONFIG_KEYS - {"model"}:
        if key in data:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number")
            if not math.isfinite(value):
                raise ConfigError(f"{key} must be finite")
            kwargs[key] = float(value)
    cfg = LatticeConfig(**kwargs)
    if cfg.model == "kronig-penney" and "L" in data and abs(cfg.L - cfg.a - cfg.b) > _WIDTH_RTOL * cfg.L:
        raise ConfigError("for kronig-penney L must equal a + b")
    if cfg.U_E is not None and cfg.U_E <= 0:
        raise ConfigError("U_E must be positive")
    cfg.unit_cell()  # validates widths, period and beta_tilde
    return cfg


def load_config(path: str | Path) -> LatticeConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_mapping(data)
