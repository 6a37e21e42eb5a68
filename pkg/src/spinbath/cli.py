"""Command-line front end: ``python -m spinbath <subcommand> ...``.

Exit codes: 0 success, 1 a validation or numerical check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import equilibrium as eq
from . import otto
from .angular_momentum import EnsembleSpec, format_half, multiplicity_table, parse_spin
from .errors import DomainError, SpinBathError

OUTPUT_DIR_ENV = "SPINBATH_OUTPUT_DIR"


# ---------------------------------------------------------------------------
# argument types


def _spin(text):
    try:
        return parse_spin(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _beta(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(val):
        raise argparse.ArgumentTypeError("NaN is not an inverse temperature")
    return val


def _finite(text):
    val = _beta(text)
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"{text!r} must be finite")
    return val


def _positive_int(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:points`` (linear) or ``start:stop:points:log``."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
        raise argparse.ArgumentTypeError(f"grid must be start:stop:points[:log], got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if points < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise argparse.ArgumentTypeError("grid bounds must be finite")
    if len(parts) == 4 and parts[3] == "log":
        if start * stop <= 0:
            raise argparse.ArgumentTypeError("log grid bounds must be nonzero with the same sign")
        return np.geomspace(start, stop, points)
    return np.linspace(start, stop, points)


# ---------------------------------------------------------------------------
# output


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def render(rows: list[dict], fields: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{f: _json_value(r[f]) for f in fields} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_cell(r[f]) for f in fields])
    return buf.getvalue()


def emit(rows, fields, args):
    text = render(rows, fields, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _pool_map(func, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))


# ---------------------------------------------------------------------------
# per-point workers (top level so they pickle)


def _energy_point(task):
    spec, beta0, beta_B, scale = task
    return {
        "beta_B": beta_B,
        "beta0": beta0,
        "E_inf": eq.steady_energy(spec, beta0, beta_B) / scale,
        "E_th": eq.thermal_energy(spec, beta_B) / scale,
    }


def _entropy_point(task):
    spec, beta0, beta_B = task
    return {
        "beta_B": beta_B,
        "S_inf": eq.steady_entropy(spec, beta0, beta_B),
        "S_th": eq.thermal_entropy(spec, beta_B),
    }


def _free_energy_point(task):
    spec, beta0, beta_B, scale = task
    if beta_B == 0:
        dF_inf = dF_th = math.nan
    else:
        dF_inf = eq.free_energy_variation(spec, beta0, beta_B, True)
        dF_th = eq.free_energy_variation(spec, beta0, beta_B, False)
    return {
        "beta_B": beta_B,
        "dF_inf": dF_inf / scale,
        "dF_th": dF_th / scale,
        "Sigma_inf": eq.entropy_production(spec, beta0, beta_B, True) / scale,
        "Sigma_th": eq.entropy_production(spec, beta0, beta_B, False) / scale,
    }


def _otto_point(task):
    spec, beta0, beta_h, lam, beta_c = task
    return otto.sweep(spec, beta0, beta_h, lam, [beta_c])[0]


def _oracle_point(task):
    from . import oracle
    from .dynamics import rates_from_bath

    spec, beta0, beta_B = task
    rates = rates_from_bath(eq.BathSpec(beta_B), spec.omega)
    state = oracle.steady_state(spec, beta0, rates)
    obs = oracle.observables(state)
    weights = oracle.sector_weights(state)
    expected = dict(zip(spec.two_j_values, eq._sector_weights(spec, beta0)))
    return {
        "n": spec.n,
        "s": format_half(spec.two_s),
        "beta0": beta0,
        "beta_B": beta_B,
        "energy_residual": abs(obs.energy - eq.steady_energy(spec, beta0, beta_B)),
        "entropy_residual": abs(obs.entropy - eq.steady_entropy(spec, beta0, beta_B)),
        "temperature_residual": abs(obs.apparent_temperature * beta_B - 1),
        "weight_residual": max(abs(weights.get(k, 0.0) - v) for k, v in expected.items()),
    }


# ---------------------------------------------------------------------------
# subcommands


def _spec(args):
    return EnsembleSpec(args.n, args.s, args.omega)


def cmd_multiplicities(args):
    spec = _spec(args)
    table = multiplicity_table(spec)
    rows = [{"J": format_half(tj), "l_J": table.l[tj]} for tj in spec.two_j_values]
    emit(rows, ["J", "l_J"], args)
    return 0


def cmd_energy_curve(args):
    spec = _spec(args)
    scale = spec.omega * spec.ns if args.normalize else 1.0
    if args.axis == "beta0":
        if args.betaB is None:
            raise DomainError("--axis beta0 needs --betaB")
        tasks = [(spec, float(b0), args.betaB, scale) for b0 in args.grid]
        fields = ["beta0", "E_inf", "E_th"]
    else:
        tasks = [(spec, args.beta0, float(b), scale) for b in args.grid]
        fields = ["beta_B", "E_inf", "E_th"]
    emit(_pool_map(_energy_point, tasks, args.jobs), fields, args)
    return 0


def cmd_entropy_curve(args):
    spec = _spec(args)
    tasks = [(spec, args.beta0, float(b)) for b in args.grid]
    emit(_pool_map(_entropy_point, tasks, args.jobs), ["beta_B", "S_inf", "S_th"], args)
    return 0


def cmd_free_energy(args):
    spec = _spec(args)
    scale = float(spec.n) if args.normalize else 1.0
    tasks = [(spec, args.beta0, float(b), scale) for b in args.grid]
    fields = ["beta_B", "dF_inf", "dF_th", "Sigma_inf", "Sigma_th"]
    emit(_pool_map(_free_energy_point, tasks, args.jobs), fields, args)
    return 0


def cmd_otto(args):
    spec = _spec(args)
    if args.grid is not None:
        tasks = [(spec, args.beta0, args.beta_h, args.lam, float(b)) for b in args.grid]
        rows = _pool_map(_otto_point, tasks, args.jobs)
        emit(rows, ["lam_beta_c", "W_coh", "W_inc", "diff_norm", "ratio"], args)
        return 0
    if args.beta_c is None:
        raise DomainError("otto needs --beta-c or --grid")
    cycle = otto.CycleSpec(spec, args.beta0, args.beta_h, args.beta_c, args.lam, args.refrigerator)
    rep = otto.cycle_work(cycle, not args.independent)
    try:
        bl = otto.beta_l(spec, args.beta0)
    except DomainError:
        bl = math.nan
    row = {
        "W_coh": rep.work_coh,
        "W_inc": rep.work_inc,
        "Q_h": rep.Q_h,
        "Q_c": rep.Q_c,
        "efficiency": rep.efficiency,
        "ratio": rep.enhancement_ratio,
        "amplified": rep.amplified,
        "beta_l": bl,
    }
    emit([row], list(row), args)
    return 0


def cmd_dynamics(args):
    from .dynamics import evolve, initial_thermal_blocks, rates_from_bath

    spec = _spec(args)
    rates = rates_from_bath(eq.BathSpec(args.betaB, args.gamma), spec.omega)
    traj = evolve(
        initial_thermal_blocks(spec, args.beta0),
        rates,
        args.t_final,
        dt=args.dt,
        sample_every=args.sample_every,
    )
    rows = [
        {"t": t, "energy": s.energy(), "entropy": s.entropy(), "apparent_temperature": s.apparent_temperature()}
        for t, s in zip(traj.times, traj.states)
    ]
    emit(rows, ["t", "energy", "entropy", "apparent_temperature"], args)
    return 0


ORACLE_SPECS = [(2, 1), (3, 1), (4, 1), (2, 2), (2, 3), (3, 2)]
ORACLE_BETA_B = [0.5, -0.5, 1.0, -1.0, 3.0, -3.0]
ORACLE_BETA0 = [0.3, 2.0, math.inf]


def cmd_oracle_check(args):
    tasks = []
    for n, ts in ORACLE_SPECS:
        spec = EnsembleSpec(n, ts)
        if spec.dimension > args.max_dim:
            continue
        tasks += [(spec, b0, bB) for bB in ORACLE_BETA_B for b0 in ORACLE_BETA0]
    rows = _pool_map(_oracle_point, tasks, args.jobs)
    for r in rows:
        r["pass"] = bool(
            max(r["energy_residual"], r["entropy_residual"], r["weight_residual"]) < args.tol
            and r["temperature_residual"] < 1e-8
        )
    fields = [
        "n", "s", "beta0", "beta_B", "energy_residual", "entropy_residual",
        "temperature_residual", "weight_residual", "pass",
    ]
    emit(rows, fields, args)
    return 0 if all(r["pass"] for r in rows) else 1


def cmd_validate(args):
    from .checks import run_suite

    results = run_suite(args.seed)
    rows = [{"check": r.name, "pass": bool(r.passed), "metric": float(r.metric)} for r in results]
    emit(rows, ["check", "pass", "metric"], args)
    return 0 if all(r["pass"] for r in rows) else 1


def figure_tables():
    """(filename, fields, rows) for every figure at its caption's parameters."""
    inf = math.inf
    tables = []
    sym = np.linspace(-3, 3, 201)
    pos = np.linspace(0, 10, 201)

    spec = EnsembleSpec(100, 1)
    rows = []
    for b0 in (0.1, 1.0, 2.0, 5.0, inf):
        rows += [_energy_point((spec, b0, float(b), 1.0)) for b in sym]
    tables.append(("fig1_energy_n100.csv", ["beta0", "beta_B", "E_inf", "E_th"], rows))

    spec = EnsembleSpec(10, 1)
    rows = []
    for bB in (1.0, -1.0):
        rows += [_energy_point((spec, float(b0), bB, 1.0)) for b0 in np.linspace(-5, 5, 201)]
    tables.append(("fig2_energy_vs_beta0_n10.csv", ["beta_B", "beta0", "E_inf", "E_th"], rows))

    family_s = [(4, 1), (4, 3), (4, 9)]
    family_n = [(2, 1), (6, 1), (9, 1), (100, 1)]
    rows3, rows4, rows5, rows6 = [], [], [], []
    for n, ts in family_s + family_n:
        spec = EnsembleSpec(n, ts)
        for b in pos:
            b = float(b)
            e_plus, e_th = eq.dicke_energy(spec, b), eq.thermal_energy(spec, b)
            base = {"n": n, "s": format_half(ts), "beta_B": b}
            rows3.append({**base, "E_plus_per_ns": e_plus / spec.ns, "E_th_per_ns": e_th / spec.ns})
            rows4.append({**base, "ratio": e_plus / e_th})
            if n != 100:
                s_plus, s_th = eq.dicke_entropy(spec, b), eq.thermal_entropy(spec, b)
                rows5.append({**base, "S_plus": s_plus, "S_th": s_th})
                rows6.append({**base, "ratio": s_th / s_plus if s_plus > 0 else math.nan})
    tables.append(("fig3_energy_per_ns.csv", ["n", "s", "beta_B", "E_plus_per_ns", "E_th_per_ns"], rows3))
    tables.append(("fig4_energy_ratio.csv", ["n", "s", "beta_B", "ratio"], rows4))
    tables.append(("fig5_entropy.csv", ["n", "s", "beta_B", "S_plus", "S_th"], rows5))
    tables.append(("fig6_entropy_ratio.csv", ["n", "s", "beta_B", "ratio"], rows6))

    rows7, rows8 = [], []
    grid = np.linspace(-3, 3, 200)  # even count keeps beta_B = 0 off the grid
    for n in (2, 6, 9, 100):
        spec = EnsembleSpec(n, 3)
        for b in grid:
            pt = _free_energy_point((spec, inf, float(b), 1.0))
            rows7.append({"n": n, "beta_B": pt["beta_B"], "dF_inf": pt["dF_inf"], "dF_th": pt["dF_th"],
                          "dF_inf_per_n": pt["dF_inf"] / n, "dF_th_per_n": pt["dF_th"] / n})
            rows8.append({"n": n, "beta_B": pt["beta_B"], "Sigma_inf_per_n": pt["Sigma_inf"] / n,
                          "Sigma_th_per_n": pt["Sigma_th"] / n})
    tables.append(("fig7_free_energy.csv", ["n", "beta_B", "dF_inf", "dF_th", "dF_inf_per_n", "dF_th_per_n"], rows7))
    tables.append(("fig8_entropy_production.csv", ["n", "beta_B", "Sigma_inf_per_n", "Sigma_th_per_n"], rows8))

    rows9 = []
    lam = 0.5
    for n, ts in family_s + family_n:
        spec = EnsembleSpec(n, ts)
        for row in otto.sweep(spec, inf, 0.0, lam, np.linspace(0.02, 10, 200)):
            rows9.append({"n": n, "s": format_half(ts), "lambda": lam, **row})
    tables.append(("fig9_otto_work.csv", ["n", "s", "lambda", "lam_beta_c", "W_coh", "W_inc", "diff_norm", "ratio"], rows9))

    rows10 = []
    for n in (2, 6, 9, 100):
        spec = EnsembleSpec(n, 1)
        s_inf0, s_th0 = eq.dicke_entropy(spec, 0.0), eq.thermal_entropy(spec, 0.0)
        for b in np.linspace(0, 5, 201):
            b = float(b)
            rows10.append({"n": n, "beta_B": b, "dS_inf": eq.dicke_entropy(spec, b) - s_inf0,
                           "dS_th": eq.thermal_entropy(spec, b) - s_th0})
    tables.append(("fig_entdiff.csv", ["n", "beta_B", "dS_inf", "dS_th"], rows10))
    return tables


def cmd_figures(args):
    outdir = Path(args.outdir or os.environ.get(OUTPUT_DIR_ENV) or "figures")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, fields, rows in figure_tables():
        (outdir / name).write_text(render(rows, fields, "csv"))
        print(outdir / name)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)

    ensemble = argparse.ArgumentParser(add_help=False)
    ensemble.add_argument("--n", type=_positive_int, required=True)
    ensemble.add_argument("--s", type=_spin, required=True, help="spin size, e.g. 1/2, 3/2, 1.5")
    ensemble.add_argument("--omega", type=_finite, default=1.0)
    ensemble.add_argument("--beta0", type=_beta, default=math.inf, help="initial inverse temperature (inf allowed)")

    parser = argparse.ArgumentParser(prog="spinbath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("multiplicities", parents=[common, ensemble], help="table of l_J")
    p.set_defaults(func=cmd_multiplicities)

    p = sub.add_parser("energy-curve", parents=[common, ensemble], help="E_inf and E_th along a grid")
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--axis", choices=("betaB", "beta0"), default="betaB")
    p.add_argument("--betaB", type=_finite, help="fixed bath value for --axis beta0")
    p.add_argument("--normalize", action="store_true", help="divide energies by omega*n*s")
    p.set_defaults(func=cmd_energy_curve)

    p = sub.add_parser("entropy-curve", parents=[common, ensemble], help="S_inf and S_th along beta_B")
    p.add_argument("--grid", type=parse_grid, required=True)
    p.set_defaults(func=cmd_entropy_curve)

    p = sub.add_parser("free-energy", parents=[common, ensemble], help="free-energy variation and entropy production")
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--normalize", action="store_true", help="report per spin")
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("otto", parents=[common, ensemble], help="Otto cycle work")
    p.add_argument("--beta-h", type=_finite, default=0.0)
    p.add_argument("--beta-c", type=_finite)
    p.add_argument("--grid", type=parse_grid, help="grid of beta_c values")
    p.add_argument("--lambda", dest="lam", type=_finite, default=0.5)
    p.add_argument("--refrigerator", action="store_true")
    p.add_argument("--independent", action="store_true", help="report heats for independent coupling")
    p.set_defaults(func=cmd_otto)

    p = sub.add_parser("dynamics", parents=[common, ensemble], help="block master-equation trajectory")
    p.add_argument("--betaB", type=_finite, required=True)
    p.add_argument("--gamma", type=_finite, default=1.0)
    p.add_argument("--t-final", type=_finite, default=50.0)
    p.add_argument("--dt", type=_finite)
    p.add_argument("--sample-every", type=_finite)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("oracle-check", parents=[common], help="closed forms against full Lindblad")
    p.add_argument("--max-dim", type=_positive_int, default=256)
    p.add_argument("--tol", type=_finite, default=1e-8)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("validate", parents=[common], help="seeded property suite")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("figures", parents=[common], help="write CSV data for every figure")
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_figures)
    return parser


_VALUE_FLAGS = {"--grid", "--beta0", "--betaB", "--beta-h", "--beta-c", "--omega", "--lambda"}


def _join_negative_values(argv):
    # argparse would read "-3:3:200" or "-inf" as an option name
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-") and argv[k + 1] not in _VALUE_FLAGS:
            nxt = argv[k + 1]
            if len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] in ".i"):
                out.append(f"{tok}={nxt}")
                k += 2
                continue
        out.append(tok)
        k += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"spinbath: error: {exc}", file=sys.stderr)
        return 2
    except SpinBathError as exc:
        print(f"spinbath: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
