"""Command-line surface: graph generation, solves, probes, acceptance runs.

Every command that computes something emits one JSON bundle (stdout or
``--out``): command echo, config echo, numeric results, solver reports,
wall-clock seconds and the artifact version. Bundles are canonical JSON, so
two runs with identical inputs differ at most in the ``seconds`` field.

Exit codes: 0 success (including an honest ``undetermined`` classification),
1 input or validation errors, 2 solver-stage failures (non-convergence,
non-Cauchy exhaustion, unstable ends, path-enumeration refusal).
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from ._util import canonical_json
from .boundary import (
    NonCauchyError,
    UnstableEndsError,
    dirichlet_at_infinity,
    exhaustion_solve,
    harmonic_decompose,
    boundary_cardinality_probe,
)
from .capacity import (
    PathCapExceeded,
    capacity,
    modulus,
    parabolicity,
    sobolev_constant,
)
from .dirichlet import SolveError, SolverOptions, solve_dirichlet
from .families import get_family
from .graph import (
    GraphValidationError,
    ends,
    exhaustion,
    generate,
    load_graph,
)
from .acceptance import format_table, run_acceptance, suite_rows, SUITES


def _parse_ids(text: str, flag: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise GraphValidationError("%s: %r is not a vertex id" % (flag, part))
    if not out:
        raise GraphValidationError("%s: no vertex ids given" % flag)
    return out


def _parse_floats(text: str, flag: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(float(part))
        except ValueError:
            raise GraphValidationError("%s: %r is not a number" % (flag, part))
    if not out:
        raise GraphValidationError("%s: no values given" % flag)
    return out


def _parse_assignments(text: str, flag: str, value=float) -> dict:
    """Parse "key=value,key=value" pairs; keys stay strings."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise GraphValidationError("%s: %r is not key=value" % (flag, part))
        key, _, raw = part.partition("=")
        try:
            out[key.strip()] = value(raw.strip())
        except ValueError:
            raise GraphValidationError("%s: %r is not a number" % (flag, raw.strip()))
    if not out:
        raise GraphValidationError("%s: no assignments given" % flag)
    return out


def _pins_to_arrays(g, pins: dict[str, float]):
    """Turn an id=value mapping into (free mask, data vector)."""
    free = np.ones(g.n, dtype=bool)
    data = np.zeros(g.n)
    for key, value in pins.items():
        try:
            vid = int(key)
        except ValueError:
            raise GraphValidationError("--pin: %r is not a vertex id" % key)
        idx = g.vertex_index(vid)
        free[idx] = False
        data[idx] = value
    return free, data


def _solver_options(args) -> SolverOptions:
    return SolverOptions(tol_update=args.tol_update,
                         tol_residual=args.tol_residual,
                         max_sweeps=args.max_sweeps)


def _report_dict(report) -> dict:
    return {
        "sweeps": report.sweeps,
        "max_update": report.max_update,
        "residual": report.residual,
        "converged": report.converged,
        "energy_final": float(report.energy[-1]) if len(report.energy) else None,
    }


def _emit(payload: dict, out: str | None) -> None:
    text = canonical_json(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _bundle(command: str, config: dict, result: dict, reports: dict,
            t0: float) -> dict:
    return {
        "command": command,
        "config": config,
        "result": result,
        "reports": reports,
        "seconds": time.perf_counter() - t0,
        "version": __version__,
    }


# -- commands -------------------------------------------------------------------


def _cmd_gen(args) -> int:
    g = generate(args.family, *args.params, measure=args.measure,
                 conductance=args.conductance, length=args.length)
    payload = g.to_json_dict()
    _emit(payload, args.out)
    return 0


def _cmd_solve(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    pins = _parse_assignments(args.pin, "--pin")
    free, data = _pins_to_arrays(g, pins)
    opts = _solver_options(args)
    u, report = solve_dirichlet(g, free, data, args.p, opts)
    bundle = _bundle(
        "solve",
        {"graph": args.graph, "p": args.p, "pin": pins,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"ids": [int(i) for i in g.ids], "values": [float(x) for x in u]},
        {"solve": _report_dict(report)},
        t0)
    _emit(bundle, args.out)
    return 0 if report.converged else 2


def _cmd_capacity(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    source = [g.vertex_index(i) for i in _parse_ids(args.source, "--source")]
    sink = [g.vertex_index(i) for i in _parse_ids(args.sink, "--sink")]
    res = capacity(g, source, sink, args.p, _solver_options(args))
    bundle = _bundle(
        "capacity",
        {"graph": args.graph, "p": args.p, "source": args.source,
         "sink": args.sink, "tol_update": args.tol_update,
         "tol_residual": args.tol_residual, "max_sweeps": args.max_sweeps},
        {"value": res.value,
         "potential": [float(x) for x in res.potential]},
        {"solve": _report_dict(res.report)},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_modulus(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    source = [g.vertex_index(i) for i in _parse_ids(args.source, "--source")]
    sink = [g.vertex_index(i) for i in _parse_ids(args.sink, "--sink")]
    res = modulus(g, source, sink, args.p, route=args.route,
                  path_cap=args.path_cap, opts=_solver_options(args))
    bundle = _bundle(
        "modulus",
        {"graph": args.graph, "p": args.p, "source": args.source,
         "sink": args.sink, "route": args.route, "path_cap": args.path_cap,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"value": res.value, "route": res.route,
         "direct_value": res.direct_value, "dual_value": res.dual_value,
         "dual_mass": res.dual_mass, "relative_gap": res.relative_gap,
         "path_count": res.path_count, "min_slack": res.min_slack,
         "iterations": res.iterations,
         "density": [float(x) for x in res.density]},
        {},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_parabolic(args) -> int:
    t0 = time.perf_counter()
    family = get_family(args.family, branching=args.branching)
    sizes = [int(s) for s in _parse_ids(args.sizes, "--sizes")]
    res = parabolicity(family, sizes, args.p, sigma=args.sigma,
                       eps_par=args.eps_par, delta=args.delta,
                       window=args.window, opts=_solver_options(args))
    bundle = _bundle(
        "parabolic",
        {"family": args.family, "branching": args.branching, "p": args.p,
         "sizes": sizes, "sigma": args.sigma, "eps_par": args.eps_par,
         "delta": args.delta, "window": args.window,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"classification": res.classification,
         "capacities": [float(c) for c in res.capacities],
         "slope": res.slope, "monotone": res.monotone,
         "thresholds": res.thresholds},
        {},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_sobolev(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    interior = [g.vertex_index(i) for i in _parse_ids(args.interior, "--interior")]
    res = sobolev_constant(g, interior, args.p, seed=args.seed)
    bundle = _bundle(
        "sobolev",
        {"graph": args.graph, "p": args.p, "interior": args.interior,
         "seed": args.seed},
        {"value": res.value, "sweeps": res.sweeps,
         "start_values": list(res.start_values),
         "minimizer": [float(x) for x in res.minimizer]},
        {},
        t0)
    _emit(bundle, args.out)
    return 0


def _data_vector(g, args) -> np.ndarray:
    data = np.full(g.n, args.data_default)
    if args.data:
        for key, value in _parse_assignments(args.data, "--data").items():
            try:
                vid = int(key)
            except ValueError:
                raise GraphValidationError("--data: %r is not a vertex id" % key)
            data[g.vertex_index(vid)] = value
    return data


def _cmd_exhaust(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    base = g.vertex_index(args.basepoint)
    radii = _parse_floats(args.radii, "--radii")
    ex = exhaustion(g, base, radii, warn=False)
    data = _data_vector(g, args)
    res = exhaustion_solve(g, data, ex, args.p, _solver_options(args),
                           cauchy_tol=args.cauchy_tol)
    bundle = _bundle(
        "exhaust",
        {"graph": args.graph, "p": args.p, "basepoint": args.basepoint,
         "radii": radii, "data_default": args.data_default,
         "data": args.data, "cauchy_tol": args.cauchy_tol,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"cauchy": res.cauchy, "selected": list(res.selected),
         "limit": [float(x) for x in res.limit],
         "energies": [float(e) for e in res.energies],
         "energy_bounded": res.energy_bounded,
         "deviations": {str(j): [float(x) for x in d]
                        for j, d in res.deviations.items()}},
        {"levels": [_report_dict(r) for r in res.reports]},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_decompose(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    base = g.vertex_index(args.basepoint)
    radii = _parse_floats(args.radii, "--radii")
    ex = exhaustion(g, base, radii, warn=False)
    data = _data_vector(g, args)
    res = harmonic_decompose(g, data, ex, args.p, _solver_options(args),
                           cauchy_tol=args.cauchy_tol)
    bundle = _bundle(
        "decompose",
        {"graph": args.graph, "p": args.p, "basepoint": args.basepoint,
         "radii": radii, "data_default": args.data_default,
         "data": args.data, "cauchy_tol": args.cauchy_tol,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"h": [float(x) for x in res.h],
         "g0": [float(x) for x in res.g0],
         "residual_interior": res.residual_interior,
         "outer_gaps": res.outer_gaps,
         "outer_gap_max": res.outer_gap_max,
         "g0_norm": res.g0_norm},
        {"levels": [_report_dict(r) for r in res.exhaustion_result.reports]},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_at_infinity(args) -> int:
    t0 = time.perf_counter()
    g = load_graph(args.graph)
    base = g.vertex_index(args.basepoint)
    probe_radii = _parse_floats(args.probe_radii, "--probe-radii")
    seeds = {lab: g.vertex_index(int(v)) for lab, v in
             _parse_assignments(args.ends, "--ends", value=int).items()}
    data = _parse_assignments(args.data, "--data")
    profile = ends(g, base, probe_radii, groups=seeds)
    radii = _parse_floats(args.radii, "--radii")
    ex = exhaustion(g, base, radii, warn=False)
    res = dirichlet_at_infinity(g, profile, data, ex, args.p,
                                _solver_options(args),
                                cauchy_tol=args.cauchy_tol)
    bundle = _bundle(
        "at-infinity",
        {"graph": args.graph, "p": args.p, "basepoint": args.basepoint,
         "probe_radii": probe_radii, "ends": args.ends, "data": data,
         "radii": radii, "cauchy_tol": args.cauchy_tol,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"h": [float(x) for x in res.h],
         "end_labels": list(profile.labels),
         "end_counts": list(profile.counts),
         "stabilized": profile.stabilized,
         "traces": {lab: {"vertices": [int(v) for v in tr.vertices],
                          "distances": [float(d) for d in tr.distances],
                          "deviations": [float(d) for d in tr.deviations]}
                    for lab, tr in res.traces.items()}},
        {"levels": [_report_dict(r) for r in res.exhaustion_result.reports]},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_probe(args) -> int:
    t0 = time.perf_counter()
    family = get_family(args.family, branching=args.branching)
    sizes = [int(s) for s in _parse_ids(args.sizes, "--sizes")]
    res = boundary_cardinality_probe(
        family, args.p, sizes, nonconstant_tol=args.nonconstant_tol,
        opts=_solver_options(args), cauchy_tol=args.cauchy_tol,
        sigma=args.sigma, eps_par=args.eps_par, delta=args.delta,
        window=args.window)
    bundle = _bundle(
        "probe",
        {"family": args.family, "branching": args.branching, "p": args.p,
         "sizes": sizes, "nonconstant_tol": args.nonconstant_tol,
         "cauchy_tol": args.cauchy_tol, "sigma": args.sigma,
         "eps_par": args.eps_par, "delta": args.delta, "window": args.window,
         "tol_update": args.tol_update, "tol_residual": args.tol_residual,
         "max_sweeps": args.max_sweeps},
        {"kind": res.kind, "k": res.k, "size": res.size,
         "classification": res.parabolicity.classification,
         "capacities": [float(c) for c in res.parabolicity.capacities],
         "witness_spreads": {lab: w.spread for lab, w in res.witnesses.items()}},
        {},
        t0)
    _emit(bundle, args.out)
    return 0


def _cmd_acceptance(args) -> int:
    t0 = time.perf_counter()
    rows = suite_rows(args.suite)
    results = run_acceptance(rows, seed=args.seed)
    if args.json:
        bundle = _bundle(
            "acceptance",
            {"suite": args.suite, "seed": args.seed},
            {"rows": [r.payload() for r in results],
             "passed": all(r.passed for r in results)},
            {},
            t0)
        _emit(bundle, args.out)
    else:
        table = format_table(results)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(table + "\n")
        else:
            print(table)
    return 0 if all(r.passed for r in results) else 2


# -- parser ----------------------------------------------------------------------


def _add_solver_flags(sub) -> None:
    sub.add_argument("--p", type=float, default=2.0,
                     help="energy exponent, must be > 1 (default 2)")
    sub.add_argument("--tol-update", type=float, default=1e-10,
                     help="sweep update gate (default 1e-10)")
    sub.add_argument("--tol-residual", type=float, default=1e-8,
                     help="residual gate (default 1e-8)")
    sub.add_argument("--max-sweeps", type=int, default=1_000_000,
                     help="sweep budget (default 1000000)")


def _add_out_flag(sub) -> None:
    sub.add_argument("--out", help="write the JSON bundle here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppotential",
        description="Nonlinear potential theory on weighted graphs: "
                    "p-energy solves, capacities, moduli, boundary behavior.")
    parser.add_argument("--version", action="version",
                        version="ppotential %s" % __version__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a graph JSON file")
    gen.add_argument("family", choices=("path", "halfline", "cycle", "tree", "grid"))
    gen.add_argument("params", type=int, nargs="+",
                     help="family parameters (path/halfline/cycle: n; "
                          "tree: branching depth; grid: width height)")
    gen.add_argument("--measure", type=float, default=1.0)
    gen.add_argument("--conductance", type=float, default=1.0)
    gen.add_argument("--length", type=float, default=1.0)
    _add_out_flag(gen)
    gen.set_defaults(func=_cmd_gen)

    solve = subs.add_parser("solve", help="pinned p-Dirichlet solve")
    solve.add_argument("graph", help="graph JSON file")
    solve.add_argument("--pin", required=True,
                       help='pinned values, e.g. "0=0,2=1" (vertex ids)')
    _add_solver_flags(solve)
    _add_out_flag(solve)
    solve.set_defaults(func=_cmd_solve)

    cap = subs.add_parser("capacity", help="condenser p-capacity")
    cap.add_argument("graph")
    cap.add_argument("--source", required=True, help="comma-separated vertex ids")
    cap.add_argument("--sink", required=True, help="comma-separated vertex ids")
    _add_solver_flags(cap)
    _add_out_flag(cap)
    cap.set_defaults(func=_cmd_capacity)

    mod = subs.add_parser("modulus", help="p-modulus of the source-sink path family")
    mod.add_argument("graph")
    mod.add_argument("--source", required=True)
    mod.add_argument("--sink", required=True)
    mod.add_argument("--route", choices=("dual", "direct", "both"), default="both")
    mod.add_argument("--path-cap", type=int, default=10_000,
                     help="refuse direct enumeration beyond this many paths")
    _add_solver_flags(mod)
    _add_out_flag(mod)
    mod.set_defaults(func=_cmd_modulus)

    par = subs.add_parser("parabolic", help="classify a family by capacity decay")
    par.add_argument("--family", required=True,
                     choices=("halfline", "line", "tree", "grid"))
    par.add_argument("--branching", type=int, default=2)
    par.add_argument("--sizes", required=True, help="comma-separated sizes")
    par.add_argument("--sigma", type=float, default=0.1)
    par.add_argument("--eps-par", type=float, default=1e-2)
    par.add_argument("--delta", type=float, default=1e-2)
    par.add_argument("--window", type=int, default=3)
    _add_solver_flags(par)
    _add_out_flag(par)
    par.set_defaults(func=_cmd_parabolic)

    sob = subs.add_parser("sobolev", help="best Rayleigh quotient on an interior set")
    sob.add_argument("graph")
    sob.add_argument("--interior", required=True, help="comma-separated vertex ids")
    sob.add_argument("--p", type=float, default=2.0)
    sob.add_argument("--seed", type=int, default=0)
    _add_out_flag(sob)
    sob.set_defaults(func=_cmd_sobolev)

    exh = subs.add_parser("exhaust", help="solve along a ball exhaustion")
    exh.add_argument("graph")
    exh.add_argument("--basepoint", type=int, required=True, help="vertex id")
    exh.add_argument("--radii", required=True, help="comma-separated radii")
    exh.add_argument("--data", default="",
                     help='pinned data overrides, e.g. "7=1,15=0.5"')
    exh.add_argument("--data-default", type=float, default=0.0)
    exh.add_argument("--cauchy-tol", type=float, default=1e-2)
    _add_solver_flags(exh)
    _add_out_flag(exh)
    exh.set_defaults(func=_cmd_exhaust)

    dec = subs.add_parser("decompose",
                          help="split data into harmonic limit plus remainder")
    dec.add_argument("graph")
    dec.add_argument("--basepoint", type=int, required=True)
    dec.add_argument("--radii", required=True)
    dec.add_argument("--data", default="")
    dec.add_argument("--data-default", type=float, default=0.0)
    dec.add_argument("--cauchy-tol", type=float, default=1e-2)
    _add_solver_flags(dec)
    _add_out_flag(dec)
    dec.set_defaults(func=_cmd_decompose)

    inf = subs.add_parser("at-infinity",
                          help="solve with one prescribed value per end")
    inf.add_argument("graph")
    inf.add_argument("--basepoint", type=int, required=True)
    inf.add_argument("--probe-radii", required=True,
                     help="comma-separated radii for end detection")
    inf.add_argument("--ends", required=True,
                     help='end seeds, e.g. "left=1,right=2" (vertex ids)')
    inf.add_argument("--data", required=True,
                     help='end values, e.g. "left=0,right=1"')
    inf.add_argument("--radii", required=True, help="exhaustion radii")
    inf.add_argument("--cauchy-tol", type=float, default=1e-2)
    _add_solver_flags(inf)
    _add_out_flag(inf)
    inf.set_defaults(func=_cmd_at_infinity)

    prb = subs.add_parser("probe",
                          help="count distinguishable boundary directions")
    prb.add_argument("--family", required=True,
                     choices=("halfline", "line", "tree", "grid"))
    prb.add_argument("--branching", type=int, default=2)
    prb.add_argument("--sizes", required=True)
    prb.add_argument("--nonconstant-tol", type=float, default=1e-6)
    prb.add_argument("--cauchy-tol", type=float, default=1e-2)
    prb.add_argument("--sigma", type=float, default=0.1)
    prb.add_argument("--eps-par", type=float, default=1e-2)
    prb.add_argument("--delta", type=float, default=1e-2)
    prb.add_argument("--window", type=int, default=3)
    _add_solver_flags(prb)
    _add_out_flag(prb)
    prb.set_defaults(func=_cmd_probe)

    acc = subs.add_parser("acceptance", help="run an acceptance suite")
    acc.add_argument("suite", help="suite name: %s" % ", ".join(SUITES))
    acc.add_argument("--json", action="store_true",
                     help="emit the JSON bundle instead of the text table")
    acc.add_argument("--seed", type=int, default=0)
    _add_out_flag(acc)
    acc.set_defaults(func=_cmd_acceptance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NonCauchyError, SolveError, UnstableEndsError, PathCapExceeded) as exc:
        print("solver failure: %s" % exc, file=sys.stderr)
        return 2
    except (GraphValidationError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
