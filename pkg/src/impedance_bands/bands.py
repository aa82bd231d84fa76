"""Band edges, band/gap tiling and E(k) branches from a dispersion F(xi).

Zones are numbered by the extended-zone quasi-momentum: band n carries
kL in [n pi, (n+1) pi] and runs from F = (-1)^n to F = (-1)^(n+1); gap n has
sign F = (-1)^n.  Numbering starts from the lowest zone consistent with the
sign of F at xi -> 0+.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .lattice import energy_of_xi

EDGE_XTOL = 1e-12
POINTS_PER_PI = 4096
_TOUCH_TOL = 1e-10
_LOCAL_MAX_WINDOW = 1e-3

DispersionFn = Callable[[np.ndarray], np.ndarray]


class GridResolutionWarning(UserWarning):
    """A band or gap narrower than the grid step was found by local refinement."""


@dataclass(frozen=True)
class Edge:
    xi: float
    kind: int  # sign of F at the edge: +1 or -1


@dataclass(frozen=True)
class Interval:
    """A band or a gap.  ``lo_kind``/``hi_kind`` are None at the scan boundaries."""

    n: int
    xi_lo: float
    xi_hi: float
    lo_kind: int | None
    hi_kind: int | None
    allowed: bool

    @property
    def width(self) -> float:
        return self.xi_hi - self.xi_lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.xi_lo + self.xi_hi)


Band = Interval


@dataclass
class EdgeScan:
    edges: list[Edge]
    touches: list[float]


@dataclass
class BandDiagram:
    bands: list[Interval]
    gaps: list[Interval]
    xi_max: float
    touches: list[float] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def intervals(self) -> list[Interval]:
        return sorted(self.bands + self.gaps, key=lambda iv: iv.xi_lo)

    def gap(self, n: int) -> Interval | None:
        for g in self.gaps:
            if g.n == n:
                return g
        return None

    def rows(self, L: float) -> list[dict]:
        return [
            {
                "kind": "band" if iv.allowed else "gap",
                "n": iv.n,
                "xi_lo": iv.xi_lo,
                "xi_hi": iv.xi_hi,
                "E_lo": energy_of_xi(iv.xi_lo, L),
                "E_hi": energy_of_xi(iv.xi_hi, L),
            }
            for iv in self.intervals()
        ]


def default_grid_n(xi_max: float) -> int:
    return max(64, int(math.ceil(POINTS_PER_PI * xi_max / math.pi)))


def bisect(g: Callable[[float], float], lo: float, hi: float, xtol: float = EDGE_XTOL) -> float:
    """Plain bisection on a bracketed sign change; deterministic for a given bracket."""
    glo = g(lo)
    if glo == 0:
        return lo
    if g(hi) == 0:
        return hi
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scalar(F: DispersionFn):
    return lambda x: float(F(np.array([x]))[0])


def find_band_edges(F: DispersionFn, xi_max: float, grid_n: int | None = None) -> EdgeScan:
    """All |F| = 1 crossings on (0, xi_max], refined to EDGE_XTOL.

    Sign changes of |F| - 1 between grid points are bisected.  Two
    situations a grid can hide are handled by local refinement: a band
    squeezed between two gaps of opposite sign (F jumps from > 1 to < -1),
    and a narrow gap or tangential touch inside an allowed stretch (local
    maximum of |F| close to 1).
    """
    if grid_n is None:
        grid_n = default_grid_n(xi_max)
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    if not xi_max > 0:
        raise ValueError("xi_max must be positive")
    x = np.linspace(0.0, xi_max, grid_n + 1)
    fx = np.asarray(F(x), dtype=float)
    f1 = _scalar(F)
    g = lambda t: abs(f1(t)) - 1.0  # noqa: E731
    allowed = np.abs(fx) <= 1.0
    edges: list[float] = []
    touches: list[float] = []

    for i in range(grid_n):
        lo, hi = x[i], x[i + 1]
        if allowed[i] != allowed[i + 1]:
            edges.append(bisect(g, lo, hi))
        elif not allowed[i] and np.sign(fx[i]) != np.sign(fx[i + 1]):
            x0 = bisect(f1, lo, hi)
            warnings.warn(f"band narrower than grid step near xi={x0:.6g}", GridResolutionWarning, stacklevel=2)
            edges.append(bisect(g, lo, x0))
            edges.append(bisect(g, x0, hi))

    af = np.abs(fx)
    for i in range(1, grid_n):
        if not (allowed[i - 1] and allowed[i] and allowed[i + 1]):
            continue
        if af[i] < af[i - 1] or af[i] < af[i + 1] or af[i] < 1.0 - _LOCAL_MAX_WINDOW:
            continue
        lo, hi = x[i - 1], x[i + 1]
        res = minimize_scalar(lambda t: -abs(f1(t)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        xm, fm = float(res.x), abs(f1(float(res.x)))
        if fm > 1.0 + _TOUCH_TOL:
            warnings.warn(f"gap narrower than grid step near xi={xm:.6g}", GridResolutionWarning, stacklevel=2)
            edges.append(bisect(g, lo, xm))
            edges.append(bisect(g, xm, hi))
        elif fm >= 1.0 - _TOUCH_TOL:
            touches.append(xm)

    edges = sorted(set(edges))
    out = [Edge(e, 1 if f1(e) > 0 else -1) for e in edges if EDGE_XTOL < e < xi_max - EDGE_XTOL]
    return EdgeScan(out, sorted(touches))


def build_diagram(F: DispersionFn, xi_max: float, grid_n: int | None = None, params: dict | None = None) -> BandDiagram:
    scan = find_band_edges(F, xi_max, grid_n)
    f1 = _scalar(F)
    bounds = [0.0] + [e.xi for e in scan.edges] + [xi_max]
    kinds: list[int | None] = [None] + [e.kind for e in scan.edges] + [None]

    raw = []
    for j in range(len(bounds) - 1):
        lo, hi = bounds[j], bounds[j + 1]
        if hi - lo <= 0:
            continue
        ok = abs(f1(0.5 * (lo + hi))) <= 1.0
        if raw and raw[-1][3] == ok:
            # an edge that does not change the classification; drop it
            raw[-1] = (raw[-1][0], hi, (raw[-1][2][0], kinds[j + 1]), ok)
        else:
            raw.append((lo, hi, (kinds[j], kinds[j + 1]), ok))

    bands: list[Interval] = []
    gaps: list[Interval] = []
    n = None
    for lo, hi, (klo, khi), ok in raw:
        if ok:
            if n is None:
                n = _first_band_index(f1, lo, hi, klo, khi)
            inside = sum(1 for t in scan.touches if lo < t < hi)
            bands.append(Interval(n, lo, hi, klo, khi, True))
            n = n + 1 + inside
        else:
            if n is None:
                n = 0 if f1(0.5 * (lo + hi)) > 0 else 1
            gaps.append(Interval(n, lo, hi, klo, khi, False))
    return BandDiagram(bands, gaps, xi_max, scan.touches, dict(params or {}))


def _first_band_index(f1, lo, hi, klo, khi) -> int:
    if khi is not None:
        return 0 if khi < 0 else 1
    if klo is not None:
        return 0 if klo > 0 else 1
    h = 1e-6 * (hi - lo)
    return 0 if f1(lo + h) > f1(hi - h) else 1


@dataclass(frozen=True)
class EkCurve:
    k: np.ndarray
    E: np.ndarray
    xi: np.ndarray
    monotonic: bool


def ek_curve(F: DispersionFn, band: Interval, samples: int, L: float) -> EkCurve:
    """Reduced-zone k = arccos(F)/L across one band."""
    if samples < 2:
        raise ValueError("need at least two samples")
    xi = np.linspace(band.xi_lo, band.xi_hi, samples)
    fx = np.clip(np.asarray(F(xi), dtype=float), -1.0, 1.0)
    kL = np.arccos(fx)
    dk = np.diff(kL)
    # even bands fold forward (k grows with E), odd bands backward
    monotonic = bool(np.all(dk > 0) if band.n % 2 == 0 else np.all(dk < 0))
    return EkCurve(kL / L, energy_of_xi(xi, L), xi, monotonic)
