"""impedance-bands command line: band diagrams, method comparison, surface states, figure data, wave functions."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import classical, surface, wavefunction
from .bands import build_diagram
from .dispersion import delta_delta_prime_rhs, kronig_penney_rhs
from .impedance import impedance_rhs
from .lattice import ConfigError, LatticeConfig, energy_of_xi, load_config
from .transfer import trace_rhs

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DISAGREE = 4

COMPARE_F_TOL = 1e-9
COMPARE_DET_TOL = 1e-7
ORACLE_TOL = 1e-5
FIGURE1_P = (10.0, 3.0, 0.1)


class NumericalFailure(RuntimeError):
    pass


class MethodDisagreement(RuntimeError):
    pass


# --- output ----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(rows: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps({"columns": list(columns), "rows": data}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".tmp-", suffix=target.suffix)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _info(args, msg: str) -> None:
    # the summary goes to stdout only when the table itself goes to a file
    print(msg, file=sys.stdout if args.out else sys.stderr)


# --- dispersion by method ------------------------------------------------------------


def dispersion_fn(cfg: LatticeConfig, method: str) -> Callable[[np.ndarray], np.ndarray]:
    cell = cfg.unit_cell()
    L = cfg.period

    if method == "transfer":
        return lambda xi: np.asarray(trace_rhs(cell, energy_of_xi(np.asarray(xi, dtype=float), L)), dtype=float)

    def F(xi):
        E = energy_of_xi(np.atleast_1d(np.asarray(xi, dtype=float)), L)
        return np.array([impedance_rhs(cell, float(e)) for e in E])

    return F


# --- commands -----------------------------------------------------------------------


BAND_COLUMNS = ("kind", "n", "xi_lo", "xi_hi", "E_lo", "E_hi")


def cmd_bands(cfg: LatticeConfig, args) -> int:
    if not args.xi_max > 0:
        raise ConfigError("--xi-max must be positive")
    diagram = build_diagram(dispersion_fn(cfg, args.method), args.xi_max, params={"model": cfg.model})
    rows = diagram.rows(cfg.period)
    emit(render(rows, BAND_COLUMNS, args.format), args.out)
    _info(args, f"{len(diagram.bands)} band(s), {len(diagram.gaps)} gap(s) on xi in [0, {args.xi_max:g}]")
    for r in rows:
        _info(args, f"  {r['kind']:4s} {r['n']:3d}  xi [{r['xi_lo']:.10g}, {r['xi_hi']:.10g}]")
    return 0


COMPARE_COLUMNS = ("E", "F_impedance", "F_transfer", "F_analytic", "abs_diff", "allowed", "det_residual")


def compare_rows(cfg: LatticeConfig, E: np.ndarray, F_imp=None) -> list[dict]:
    cell = cfg.unit_cell()
    L = cfg.period
    fi = np.array([impedance_rhs(cell, float(e)) for e in E]) if F_imp is None else F_imp(E)
    ft = np.asarray(trace_rhs(cell, E), dtype=float)
    fa = np.asarray(kronig_penney_rhs(E, cfg.a, cfg.b, cfg.U_b), dtype=float)
    allowed = np.abs(ft) <= 1.0
    det = np.full(E.shape, np.nan)
    if allowed.any():
        k = np.arccos(np.clip(fi[allowed], -1.0, 1.0)) / L
        det[allowed] = classical.residual_at(cfg.a, cfg.b, cfg.U_b, E[allowed], k)
    rows = []
    for e, a, t, an, ok, d in zip(E.tolist(), fi.tolist(), ft.tolist(), fa.tolist(), allowed.tolist(), det.tolist()):
        rows.append({"E": e, "F_impedance": a, "F_transfer": t, "F_analytic": an,
                     "abs_diff": abs(a - t), "allowed": ok, "det_residual": d if ok else None})
    return rows


def compare_verdict(rows: list[dict]) -> tuple[float, float, bool]:
    """max |dF| scaled by max(1, |F|), worst in-band determinant residual, pass flag."""
    dF = max((r["abs_diff"] / max(1.0, abs(r["F_transfer"])) for r in rows), default=0.0)
    det = max((r["det_residual"] for r in rows if r["allowed"]), default=0.0)
    return dF, det, dF < COMPARE_F_TOL and det < COMPARE_DET_TOL


def cmd_compare_methods(cfg: LatticeConfig, args) -> int:
    if cfg.model != "kronig-penney":
        raise ConfigError("compare-methods needs model = kronig-penney")
    if args.samples < 2 or not args.e_max > 0:
        raise ConfigError("need --samples >= 2 and --e-max > 0")
    E = np.linspace(args.e_max / args.samples, args.e_max, args.samples)
    rows = compare_rows(cfg, E)
    emit(render(rows, COMPARE_COLUMNS, args.format), args.out)
    dF, det, ok = compare_verdict(rows)
    _info(args, f"max |dF| = {dF:.3e}, max in-band det residual = {det:.3e}: {'agree' if ok else 'DISAGREE'}")
    if not ok:
        raise MethodDisagreement(f"methods disagree: max |dF| = {dF:.3e}, det residual = {det:.3e}")
    return 0


SURFACE_COLUMNS = ("n", "xi", "lambda", "E", "residual_1", "residual_2")
ORACLE_COLUMNS = ("E_oracle", "oracle_rel_delta")


def _surface_states(cfg: LatticeConfig, p_eta: float, args):
    s = cfg.s
    if p_eta == 0.0 and args.spacer == 0.0 and args.variant == "derived":
        return surface.solve_clean_edge(s, cfg.p, L=cfg.period)
    return surface.solve_deformed_edge(s, cfg.p, p_eta, L=cfg.period, spacer=args.spacer, variant=args.variant)


def _oracle_check(cfg: LatticeConfig, p_eta: float, states, args) -> list[dict]:
    L = cfg.period
    lattice = surface.semi_infinite_dirac(cfg.s, cfg.p, p_eta, L, args.spacer)
    bulk = surface.bulk_diagram(cfg.p, cfg.s)
    rows = []
    for gap in bulk.gaps:
        lo, hi = surface.gap_energy_window(gap, cfg.U_E, L)
        if not hi > lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", surface.SlowDecayWarning)
            found = surface.finite_lattice_oracle(lattice, args.oracle, (lo, hi))
        mine = [st for st in states if st.n == gap.n]
        if len(found) != len(mine):
            raise NumericalFailure(f"gap {gap.n}: {len(mine)} analytic state(s) but {len(found)} from the oracle")
        for st, e in zip(mine, found):
            delta = abs(e - st.E) / abs(st.E)
            if delta > ORACLE_TOL:
                raise NumericalFailure(f"gap {gap.n}: oracle energy {e!r} vs {st.E!r}")
            rows.append({"E_oracle": e, "oracle_rel_delta": delta})
    return rows


def _state_row(st) -> dict:
    return {"n": st.n, "xi": st.xi, "lambda": st.lam, "E": st.E, "residual_1": st.residual_1, "residual_2": st.residual_2}


def cmd_surface_states(cfg: LatticeConfig, args) -> int:
    if cfg.model != "dirac":
        raise ConfigError("surface-states needs model = dirac")
    if not cfg.p > 0:
        raise ConfigError("surface-states needs p > 0")
    if cfg.U_E is None:
        raise ConfigError("surface-states needs U_E")
    if args.oracle is not None and args.oracle < 20:
        raise ConfigError("--oracle needs N >= 20")

    if args.sweep_p_eta is not None:
        start, stop, step = args.sweep_p_eta
        if not step > 0 or stop < start:
            raise ConfigError("--sweep-p-eta needs START <= STOP and STEP > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        rows = []
        for i in range(count):
            p_eta = round(start + i * step, 12)
            for st in _surface_states(cfg, p_eta, args):
                rows.append({"p_eta": p_eta, **_state_row(st)})
        emit(render(rows, ("p_eta",) + SURFACE_COLUMNS, args.format), args.out)
        _info(args, f"{len(rows)} state(s) over {count} p_eta value(s)")
        return 0

    p_eta = cfg.p_eta if args.p_eta is None else args.p_eta
    states = _surface_states(cfg, p_eta, args)
    rows = [_state_row(st) for st in states]
    columns = SURFACE_COLUMNS
    if args.oracle is not None:
        for r, extra in zip(rows, _oracle_check(cfg, p_eta, states, args)):
            r.update(extra)
        columns = SURFACE_COLUMNS + ORACLE_COLUMNS
    emit(render(rows, columns, args.format), args.out)
    _info(args, f"{len(states)} surface state(s) for s = {cfg.s:.10g}, p = {cfg.p:.10g}, p_eta = {p_eta:.10g}")
    return 0


FIGURE1_COLUMNS = ("p", "beta_tilde", "gap_index", "xi_bottom", "xi_top")


def beta_grid(beta_max: float, steps: int) -> np.ndarray:
    """Symmetric grid k * beta_max / steps, k = -steps..steps, so 0 is hit exactly."""
    if not 0 < beta_max < 1:
        raise ConfigError("beta grid must stay inside (-1, 1)")
    if steps < 1:
        raise ConfigError("--beta-steps must be positive")
    return np.arange(-steps, steps + 1) * beta_max / steps


def figure1_rows(ps: Sequence[float], betas: np.ndarray) -> list[dict]:
    rows = []
    for p in ps:
        for b in betas.tolist():
            xi_max = 4 * math.pi
            while True:
                F = lambda x, p=p, b=b: delta_delta_prime_rhs(x, p, b)  # noqa: E731
                diagram = build_diagram(F, xi_max, grid_n=2048)
                g2 = diagram.gap(2)
                if g2 is not None and g2.hi_kind is not None:
                    break
                xi_max *= 2
                if xi_max > 64 * math.pi:
                    raise NumericalFailure(f"gap 2 not closed below xi = {xi_max} for p={p}, beta={b}")
            for n in (1, 2):
                g = diagram.gap(n)
                if g is None:
                    raise NumericalFailure(f"no gap {n} for p={p}, beta={b}")
                rows.append({"p": p, "beta_tilde": b, "gap_index": n, "xi_bottom": g.xi_lo, "xi_top": g.xi_hi})
    return rows


def cmd_figure1(cfg: LatticeConfig | None, args) -> int:
    ps = tuple(args.p) if args.p else FIGURE1_P
    rows = figure1_rows(ps, beta_grid(args.beta_max, args.beta_steps))
    emit(render(rows, FIGURE1_COLUMNS, args.format), args.out)
    _info(args, f"{len(rows)} gap boundary row(s) for p in {list(ps)}")
    return 0


WAVE_COLUMNS = ("x", "re_psi", "im_psi", "abs_psi2", "re_Z", "im_Z")


def cmd_wavefunction(cfg: LatticeConfig, args) -> int:
    if cfg.model != "dirac":
        raise ConfigError("wavefunction needs model = dirac")
    if (args.xi is None) == (args.energy is None):
        raise ConfigError("give exactly one of --xi and --energy")
    L = cfg.period
    xi = args.xi if args.xi is not None else math.sqrt(2.0 * args.energy) * L
    if not xi > 0:
        raise ConfigError("energy must be positive")
    try:
        wave = wavefunction.dirac_bloch_wave(xi, cfg.p, L, allow_gap=args.allow_gap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = wavefunction.sample_rows(wave, args.cells, args.samples_per_cell)
    emit(render(rows, WAVE_COLUMNS, args.format), args.out)
    _info(args, f"Bloch factor exp(ikL) = {wave.bloch_factor:.12g}, |.| = {abs(wave.bloch_factor):.12g}")
    return 0


# --- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impedance-bands", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="lattice JSON file")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("bands", help="band/gap table")
    common(p)
    p.add_argument("--method", choices=("impedance", "transfer"), default="impedance")
    p.add_argument("--xi-max", type=float, default=10.0)

    p = sub.add_parser("compare-methods", help="impedance vs transfer matrix vs 4x4 determinant (Kronig-Penney)")
    common(p)
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--e-max", type=float, default=30.0)

    p = sub.add_parser("surface-states", help="surface states of a semi-infinite Dirac comb")
    common(p)
    p.add_argument("--p-eta", type=float, help="edge delta strength (overrides eta in the config)")
    p.add_argument("--spacer", type=float, default=0.0, help="free spacer between step and edge delta, in periods")
    p.add_argument("--variant", choices=("derived", "printed"), default="derived")
    p.add_argument("--oracle", type=int, metavar="N", help="cross-check with an N-cell lattice")
    p.add_argument("--sweep-p-eta", type=float, nargs=3, metavar=("START", "STOP", "STEP"))

    p = sub.add_parser("figure1", help="gap 1 and 2 boundaries of the delta-delta' comb versus beta_tilde")
    common(p, config_required=False)
    p.add_argument("--p", type=float, action="append", help="comb strength (repeatable; default 10, 3, 0.1)")
    p.add_argument("--beta-max", type=float, default=0.95)
    p.add_argument("--beta-steps", type=int, default=95, help="grid points on each side of 0")

    p = sub.add_parser("wavefunction", help="psi and Z samples over a few cells")
    common(p)
    p.add_argument("--xi", type=float)
    p.add_argument("--energy", type=float)
    p.add_argument("--cells", type=int, default=3)
    p.add_argument("--samples-per-cell", type=int, default=200)
    p.add_argument("--allow-gap", action="store_true")
    return parser


COMMANDS = {
    "bands": cmd_bands,
    "compare-methods": cmd_compare_methods,
    "surface-states": cmd_surface_states,
    "figure1": cmd_figure1,
    "wavefunction": cmd_wavefunction,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MethodDisagreement as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DISAGREE
    except (NumericalFailure, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
