"""Acceptance criteria, one report line each.

Run under pytest (lines appear in the "acceptance" summary section) or
directly with ``python3 tests/test_acceptance.py``.  Tolerances are pinned
below; a criterion whose literal wording cannot hold is checked literally in
a strict xfail test and reported as FAIL.
"""

from __future__ import annotations

import math
import time
import warnings
from functools import lru_cache

import numpy as np
import pytest
from scipy.optimize import brentq

from impedance_bands.bands import build_diagram
from impedance_bands.classical import residual_at
from impedance_bands.cli import FIGURE1_P, beta_grid, figure1_rows
from impedance_bands.dispersion import delta_delta_prime_rhs, dirac_rhs, kronig_penney_rhs
from impedance_bands.impedance import impedance_rhs
from impedance_bands.lattice import make_delta_delta_prime_comb, make_kronig_penney
from impedance_bands.surface import (
    SlowDecayWarning,
    bulk_diagram,
    finite_lattice_oracle,
    gap_energy_window,
    semi_infinite_dirac,
    solve_clean_edge,
    solve_deformed_edge,
)
from impedance_bands.transfer import trace_rhs
from impedance_bands.wavefunction import dirac_bloch_wave, dpsi_at, impedance_profile, psi_at

# criterion 1
KP_F_TOL = 1e-10
KP_DET_TOL = 1e-7
KP_GRID = 2048
KP_TRIPLES = 100
KP_TIME = 10.0
# criterion 2
DIRAC_NPI_TOL = 1e-14
DIRAC_NPI_P = (-100.0, -10.0, -1.0, 0.0, 0.1, 1.0, 3.0, 10.0, 50.0, 100.0)
DIRAC_SMALL_XI = 1e-4
DIRAC_SMALL_TOL = 1e-8
DIRAC_SMALL_P_OK = (0.1, 1.0, 2.0, 2.5)
DIRAC_SMALL_P_LITERAL = (10.0, 20.0)
DIRAC_EDGE_TOL = 1e-10
# criterion 3
DDP_REDUCE_N = 10_000
DDP_REDUCE_TOL = 1e-14
DDP_TRACE_TOL = 1e-9
# criteria 4 and 5
SS_RANDOM = 20
SS_N = 40
SS_N_CHECK = 80
SS_CONVERGE_TOL = 1e-8
SS_ORACLE_TOL = 1e-6
SS_TIME = 30.0
DEF_CLEAN_TOL = 1e-10
DEF_ORACLE_TOL = 1e-5
DEF_P_ETA = (0.5, 1.0, 2.0)
# criterion 6
WF_RATIO_TOL = 1e-10
WF_JUMP_TOL = 1e-8
WF_Z_TOL = 1e-6
# criterion 7
FIG_TIME = 20.0
FIG_STEP_MAX = 0.05
FIG_MID_FRACTION = 0.6
FIG_REDUCE_TOL = 1e-10


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


# --- 1: three-way Kronig-Penney ----------------------------------------------------


@lru_cache(maxsize=None)
def criterion_1():
    rng = np.random.default_rng(20240)
    triples = [(1.0, 1.0, 8.0)] + [
        (rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(0, 50)) for _ in range(KP_TRIPLES)
    ]
    t0 = time.perf_counter()
    worst_band, worst_rel, worst_det, worst_analytic = 0.0, 0.0, 0.0, 0.0
    for a, b, U in triples:
        E = np.linspace(1e-3, 3 * U + 20, KP_GRID)
        cell = make_kronig_penney(a, b, U)
        Fi = np.array([impedance_rhs(cell, float(e)) for e in E])
        Ft = np.asarray(trace_rhs(cell, E))
        Fa = np.asarray(kronig_penney_rhs(E, a, b, U))
        scale = np.maximum(1.0, np.abs(Ft))
        worst_rel = max(worst_rel, float(np.max(np.abs(Fi - Ft) / scale)))
        worst_analytic = max(worst_analytic, float(np.max(np.abs(Fa - Ft) / scale)))
        band = np.abs(Ft) <= 1.0
        if band.any():
            worst_band = max(worst_band, float(np.max(np.abs(Fi - Ft)[band])))
            k = np.arccos(np.clip(Fi[band], -1.0, 1.0)) / (a + b)
            worst_det = max(worst_det, float(np.max(residual_at(a, b, U, E[band], k))))
    dt = time.perf_counter() - t0
    ok = worst_band < KP_F_TOL and worst_rel < KP_F_TOL and worst_det < KP_DET_TOL and dt < KP_TIME
    detail = (f"in-band max|F_imp-tr/2| = {worst_band:.1e}, max over grid /max(1,|F|) = {worst_rel:.1e} "
              f"(tol {KP_F_TOL:g}); analytic vs trace {worst_analytic:.1e}; det residual {worst_det:.1e} "
              f"(tol {KP_DET_TOL:g}); {len(triples)} triples x {KP_GRID} E in {dt:.1f} s (< {KP_TIME:g} s)")
    return ok, detail


def test_criterion_1(acceptance_report):
    ok, detail = criterion_1()
    acceptance_report.append(_line(1, ok, detail))
    assert ok, detail


# --- 2: Dirac identities -----------------------------------------------------------


def _tan_half_roots(p: float, xi_max: float) -> list[float]:
    # away from xi = 2 pi n, F = 1 is p cos(xi/2) = xi sin(xi/2), i.e. tan(xi/2) = p/xi
    g = lambda x: p * math.cos(x / 2) - x * math.sin(x / 2)  # noqa: E731
    x = np.linspace(1e-6, xi_max, 20001)
    gx = [g(t) for t in x]
    return [brentq(g, x[i], x[i + 1], xtol=1e-15) for i in range(len(x) - 1) if gx[i] * gx[i + 1] < 0]


def _small_xi_error(p: float) -> float:
    return abs(dirac_rhs(DIRAC_SMALL_XI, p) - (1 + p))


@lru_cache(maxsize=None)
def criterion_2():
    npi = max(abs(dirac_rhs(n * math.pi, p) - (-1) ** n) for n in range(1, 11) for p in DIRAC_NPI_P)
    small_ok = max(_small_xi_error(p) for p in DIRAC_SMALL_P_OK)
    small_lit = {p: _small_xi_error(p) for p in DIRAC_SMALL_P_LITERAL}
    edge = 0.0
    for p in (0.5, 3.0, 10.0, 40.0):
        d = build_diagram(lambda x, p=p: dirac_rhs(x, p), 30.0)
        mine = sorted(e for b in d.bands for e, k in ((b.xi_lo, b.lo_kind), (b.xi_hi, b.hi_kind))
                      if k == 1 and abs(math.sin(e / 2)) > 1e-6)
        ref = _tan_half_roots(p, 30.0)
        assert len(mine) == len(ref), (p, mine, ref)
        edge = max(edge, max(abs(a - b) for a, b in zip(mine, ref)))
    parts = {
        "npi": npi < DIRAC_NPI_TOL,
        "small_attainable": small_ok < DIRAC_SMALL_TOL,
        "small_literal": all(v < DIRAC_SMALL_TOL for v in small_lit.values()),
        "edges": edge < DIRAC_EDGE_TOL,
    }
    detail = (f"F(n pi) max err {npi:.1e} (tol {DIRAC_NPI_TOL:g}, |p| <= 100); "
              f"|F(1e-4)-(1+p)| {small_ok:.1e} for p <= 2.5 but "
              + ", ".join(f"{v:.1e} at p={p:g}" for p, v in small_lit.items())
              + f" (tol {DIRAC_SMALL_TOL:g}; the xi^2 term (1/2+p/6) xi^2 exceeds it for p > 3); "
              f"F=+1 edges vs tan(xi/2)=p/xi {edge:.1e} (tol {DIRAC_EDGE_TOL:g})")
    return all(parts.values()), parts, detail


def test_criterion_2(acceptance_report):
    ok, parts, detail = criterion_2()
    acceptance_report.append(_line(2, ok, detail))
    assert parts["npi"] and parts["small_attainable"] and parts["edges"], detail


@pytest.mark.xfail(strict=True, reason="F(1e-4) - (1+p) = -(1/2+p/6)1e-8 exceeds 1e-8 once p > 3")
def test_criterion_2_small_xi_literal_any_p():
    _, parts, detail = criterion_2()
    assert parts["small_literal"], detail


def test_small_xi_series_bound():
    for p in (0.1, 1.0, 10.0, 100.0):
        err = dirac_rhs(DIRAC_SMALL_XI, p) - (1 + p) + (0.5 + p / 6) * DIRAC_SMALL_XI**2
        assert abs(err) < 1e-13 * (1 + p)


# --- 3: delta-delta' reduction and oracle -------------------------------------------


@lru_cache(maxsize=None)
def criterion_3():
    rng = np.random.default_rng(7)
    xi = rng.uniform(1e-3, 50, DDP_REDUCE_N)
    p = rng.uniform(-20, 20, DDP_REDUCE_N)
    red = max(abs(delta_delta_prime_rhs(x, q, 0.0) - dirac_rhs(x, -q)) for x, q in zip(xi, p))
    worst, wrong_min = 0.0, math.inf
    for _ in range(2000):
        b, q, L = rng.uniform(-0.9, 0.9), rng.uniform(0.1, 10), rng.uniform(0.5, 2)
        x = rng.uniform(0.05, 30)
        F = delta_delta_prime_rhs(x, q, b)
        Ft = trace_rhs(make_delta_delta_prime_comb(q, b, L), (x / L) ** 2 / 2)
        worst = max(worst, abs(F - Ft) / max(1, abs(Ft)))
        if abs(b) > 0.2 and abs(math.sin(x)) > 0.2:
            alt = (1 + b * b) / (1 - b * b) * (math.cos(x) - q / (x * (1 + b) ** 2) * math.sin(x))
            wrong_min = min(wrong_min, abs(alt - Ft))
    ok = red < DDP_REDUCE_TOL and worst < DDP_TRACE_TOL and wrong_min > 1e-3
    detail = (f"b=0 reduction max {red:.1e} on {DDP_REDUCE_N} points (tol {DDP_REDUCE_TOL:g}); "
              f"analytic vs delta-delta' trace {worst:.1e} (tol {DDP_TRACE_TOL:g}); "
              f"(1+b)^2 variant off the trace by >= {wrong_min:.1e}, (1+b^2) variant ships")
    return ok, detail


def test_criterion_3(acceptance_report):
    ok, detail = criterion_3()
    acceptance_report.append(_line(3, ok, detail))
    assert ok, detail


# --- 4 and 5: surface states ------------------------------------------------------------


def _oracle_by_gap(s, p, N, p_eta=0.0, spacer=0.0):
    lat = semi_infinite_dirac(s, p, p_eta, 1.0, spacer)
    out = {}
    for gap in bulk_diagram(p, s).gaps:
        lo, hi = gap_energy_window(gap, lat.left_barrier_U_E, 1.0)
        if hi > lo:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SlowDecayWarning)
                out[gap.n] = finite_lattice_oracle(lat, N, (lo, hi))
    return out


def _compare(states, oracle):
    counts_ok, worst = True, 0.0
    for n, energies in oracle.items():
        mine = [st.E for st in states if st.n == n]
        if len(mine) != len(energies):
            counts_ok = False
            continue
        for a, b in zip(mine, energies):
            worst = max(worst, abs(a - b) / abs(a))
    return counts_ok, worst


@lru_cache(maxsize=None)
def surface_cases():
    rng = np.random.default_rng(31)
    return ((10.0, 10.0),) + tuple((float(rng.uniform(5, 30)), float(rng.uniform(1, 20))) for _ in range(SS_RANDOM))


@lru_cache(maxsize=None)
def clean_states():
    return {(s, p): solve_clean_edge(s, p) for s, p in surface_cases()}


@lru_cache(maxsize=None)
def criterion_4():
    t0 = time.perf_counter()
    counts_ok, worst, conv, total = True, 0.0, 0.0, 0
    clean_states.cache_clear()
    clean = clean_states()
    for (s, p), states in clean.items():
        total += len(states)
        o40 = _oracle_by_gap(s, p, SS_N)
        o80 = _oracle_by_gap(s, p, SS_N_CHECK)
        c, w = _compare(states, o40)
        counts_ok &= c
        worst = max(worst, w)
        for n in o40:
            if len(o40[n]) != len(o80[n]):
                counts_ok = False
            conv = max([conv] + [abs(a - b) for a, b in zip(o40[n], o80[n])])
    dt = time.perf_counter() - t0
    ok = counts_ok and worst < SS_ORACLE_TOL and conv < SS_CONVERGE_TOL and dt < SS_TIME
    detail = (f"{len(surface_cases())} (s,p) cases, {total} states, per-gap counts "
              f"{'identical' if counts_ok else 'DIFFER'}; max rel |E-E_oracle(N={SS_N})| {worst:.1e} "
              f"(tol {SS_ORACLE_TOL:g}); N={SS_N} vs {SS_N_CHECK} {conv:.1e} (tol {SS_CONVERGE_TOL:g}); "
              f"{dt:.1f} s (< {SS_TIME:g} s)")
    return ok, detail


def test_criterion_4(acceptance_report):
    ok, detail = criterion_4()
    acceptance_report.append(_line(4, ok, detail))
    assert ok, detail


@lru_cache(maxsize=None)
def criterion_5():
    clean = clean_states()
    reduce_worst, reduce_counts = 0.0, True
    for (s, p), states in clean.items():
        d = solve_deformed_edge(s, p, 0.0)
        if [x.n for x in d] != [x.n for x in states]:
            reduce_counts = False
            continue
        reduce_worst = max([reduce_worst] + [abs(a.E - b.E) for a, b in zip(d, states)])
    counts_ok, worst, found = True, 0.0, []
    for pe in DEF_P_ETA:
        states = solve_deformed_edge(10.0, 10.0, pe)
        found.append(len(states))
        c, w = _compare(states, _oracle_by_gap(10.0, 10.0, SS_N, pe))
        counts_ok &= c and len(states) > 0
        worst = max(worst, w)
    ok = reduce_counts and reduce_worst < DEF_CLEAN_TOL and counts_ok and worst < DEF_ORACLE_TOL
    detail = (f"p_eta=0 vs clean over {len(clean)} cases {reduce_worst:.1e} (tol {DEF_CLEAN_TOL:g}); "
              f"p_eta in {list(DEF_P_ETA)} at s=p_alpha=10, eta-delta at x=0: {found} states, "
              f"max rel vs oracle {worst:.1e} (tol {DEF_ORACLE_TOL:g})")
    return ok, detail


def test_criterion_5(acceptance_report):
    ok, detail = criterion_5()
    acceptance_report.append(_line(5, ok, detail))
    assert ok, detail


# --- 6: wave function invariants -------------------------------------------------------


def _fd_jump(w, node, h=1e-4):
    f = lambda d: psi_at(w, node + d)  # noqa: E731
    right = (-25 * f(0) + 48 * f(h) - 36 * f(2 * h) + 16 * f(3 * h) - 3 * f(4 * h)) / (12 * h)
    left = (25 * f(0) - 48 * f(-h) + 36 * f(-2 * h) - 16 * f(-3 * h) + 3 * f(-4 * h)) / (12 * h)
    return right - left


@lru_cache(maxsize=None)
def criterion_6():
    ratio, jump, zerr = 0.0, 0.0, 0.0
    for p in (1.0, 10.0):
        d = build_diagram(lambda x, p=p: dirac_rhs(x, p), 12.0)
        for b in d.bands:
            for xi in np.linspace(b.xi_lo, b.xi_hi, 7)[1:-1]:
                w = dirac_bloch_wave(float(xi), p)
                x = np.linspace(0.0, 1.0, 201)[:-1]
                base = psi_at(w, x)
                keep = np.abs(base) > 1e-6
                for n in (1, 2, 3):
                    r = psi_at(w, x + n)[keep] / base[keep]
                    ratio = max(ratio, float(np.max(np.abs(r - w.bloch_factor**n))))
                for node in (1.0, 2.0, 3.0):
                    jump = max(jump, abs(_fd_jump(w, node) - 2 * p * psi_at(w, node)))
                xs = np.linspace(0.01, 2.99, 300)
                xs = xs[np.abs(xs - np.round(xs)) > 1e-3]
                ps = psi_at(w, xs)
                keep = np.abs(ps) > 1e-3
                h = 1e-6
                dpsi = (psi_at(w, xs + h) - psi_at(w, xs - h)) / (2 * h)
                Z = impedance_profile(w, xs)[keep]
                Zfd = (dpsi / ps / 1j)[keep]
                zerr = max(zerr, float(np.max(np.abs(Z - Zfd) / np.maximum(1, np.abs(Z)))))
                assert np.allclose(Z, (dpsi_at(w, xs) / ps / 1j)[keep], rtol=1e-12)
    ok = ratio < WF_RATIO_TOL and jump < WF_JUMP_TOL and zerr < WF_Z_TOL
    detail = (f"Bloch ratio over 3 cells {ratio:.1e} (tol {WF_RATIO_TOL:g}); node jump vs 2 alpha psi "
              f"{jump:.1e} (tol {WF_JUMP_TOL:g}); Z vs (1/i) psi'/psi by differences {zerr:.1e} (tol {WF_Z_TOL:g})")
    return ok, detail


def test_criterion_6(acceptance_report):
    ok, detail = criterion_6()
    acceptance_report.append(_line(6, ok, detail))
    assert ok, detail


# --- 7: figure 1 -----------------------------------------------------------------------


def _gap_at(p, b, n):
    rows = figure1_rows([p], np.array([b]))
    r = [x for x in rows if x["gap_index"] == n][0]
    return r["xi_bottom"], r["xi_top"]


@lru_cache(maxsize=None)
def criterion_7():
    t0 = time.perf_counter()
    betas = beta_grid(0.95, 95)
    rows = figure1_rows(FIGURE1_P, betas)
    dt = time.perf_counter() - t0
    i0 = int(np.flatnonzero(betas == 0.0)[0])

    step, mid_ok = 0.0, True
    reduce = 0.0
    at0 = {}
    for p in FIGURE1_P:
        dirac = build_diagram(lambda x, p=p: dirac_rhs(x, -p), 4 * math.pi)
        for n in (1, 2):
            r = [x for x in rows if x["p"] == p and x["gap_index"] == n]
            for key, col in ((0, "xi_bottom"), (1, "xi_top")):
                v = np.array([x[col] for x in r])
                jumps = np.abs(np.diff(v))
                step = max(step, float(jumps.max()))
                j = int(np.argmax(jumps))
                if jumps[j] > 0:
                    m = _gap_at(p, 0.5 * (betas[j] + betas[j + 1]), n)[key]
                    lo, hi = sorted((v[j], v[j + 1]))
                    mid_ok &= lo - 1e-12 <= m <= hi + 1e-12
                    mid_ok &= max(m - lo, hi - m) <= FIG_MID_FRACTION * jumps[j] + 1e-12
            g = dirac.gap(n)
            reduce = max(reduce, abs(r[i0]["xi_bottom"] - g.xi_lo), abs(r[i0]["xi_top"] - g.xi_hi))
            at0[(p, n)] = (r[i0]["xi_bottom"], r[i0]["xi_top"])
    (b10, t10), (b01, t01) = at0[(10.0, 1)], at0[(0.1, 1)]
    # a top counts as higher only beyond the edge resolution, not by bisection rounding
    strict = b10 < b01 and t10 > t01 + FIG_REDUCE_TOL
    weak = b10 < b01 and abs(t10 - math.pi) < FIG_REDUCE_TOL and abs(t01 - math.pi) < FIG_REDUCE_TOL
    parts = {
        "continuous": step < FIG_STEP_MAX and mid_ok,
        "reduces": reduce < FIG_REDUCE_TOL,
        "enclose_weak": weak,
        "enclose_strict": strict,
        "time": dt < FIG_TIME,
    }
    detail = (f"max boundary step {step:.3f} per 0.01 in beta (< {FIG_STEP_MAX:g}), midpoint refinement "
              f"{'consistent' if mid_ok else 'INCONSISTENT'}; beta=0 vs Dirac(-p) {reduce:.1e} "
              f"(tol {FIG_REDUCE_TOL:g}); gap 1 at beta=0: p=10 [{b10:.6f}, {t10:.12f}] vs "
              f"p=0.1 [{b01:.6f}, {t01:.12f}], bottoms strictly ordered, tops both pi, strict enclosure "
              f"{'holds' if strict else 'impossible (shared edge at pi)'}; {len(rows)} rows in {dt:.1f} s "
              f"(< {FIG_TIME:g} s)")
    return all(parts.values()), parts, detail


def test_criterion_7(acceptance_report):
    ok, parts, detail = criterion_7()
    acceptance_report.append(_line(7, ok, detail))
    assert parts["continuous"] and parts["reduces"] and parts["enclose_weak"] and parts["time"], detail


@pytest.mark.xfail(strict=True, reason="every gap 1 at beta=0 ends at xi = pi, so strict enclosure cannot hold")
def test_criterion_7_strict_enclosure_literal():
    _, parts, detail = criterion_7()
    assert parts["enclose_strict"], detail


def main() -> int:
    results = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(), criterion_7()]
    failed = 0
    for n, res in enumerate(results, start=1):
        ok, detail = res[0], res[-1]
        print(_line(n, ok, detail))
        failed += not ok
    return failed


if __name__ == "__main__":
    raise SystemExit(main())
