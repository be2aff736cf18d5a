"""Oracle-backed acceptance rows covering the whole library surface.

Every row recomputes its claim from scratch against an independent oracle
(series-parallel reduction, dense linear algebra, finite differences, brute
force grid search) or an analytic closed form, and reports per-check
measured / expected / tolerance triples. The determinism row re-runs every
other row twice with the same seed and compares canonical JSON payloads byte
for byte; wall-clock timing is kept out of the payloads for that reason.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from ._util import canonical_json, jsonable
from .boundary import dirichlet_at_infinity, harmonic_decompose
from .calculus import clamp, energy_gradient, grad, p_energy, product_upper_gradient
from .capacity import capacity, modulus, parabolicity, sobolev_constant
from .dirichlet import SolverOptions, compare, solve_required
from .families import get_family
from .graph import (
    WeightedGraph,
    ends,
    exhaustion,
    generate,
    random_connected_graph,
)

P_GRID = (1.5, 2.0, 3.0)


@dataclass(frozen=True)
class Check:
    """One measured-vs-expected comparison inside a row."""

    name: str
    passed: bool
    measured: object
    expected: object
    tolerance: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class RowResult:
    """Outcome of one acceptance row: verdict, checks, echoed settings."""

    row: str
    passed: bool
    checks: tuple[Check, ...]
    settings: dict
    seconds: float

    def payload(self) -> dict:
        """Timing-free content used for reporting and byte comparison."""
        return {
            "row": self.row,
            "passed": bool(self.passed),
            "settings": jsonable(self.settings),
            "checks": [jsonable(asdict(c)) for c in self.checks],
        }


def _rel_err(measured: float, expected: float) -> float:
    return abs(measured - expected) / max(abs(expected), 1e-300)


def _check_rel(name: str, measured: float, expected: float, tol: float) -> Check:
    err = _rel_err(measured, expected)
    return Check(name=name, passed=bool(err <= tol), measured=float(measured),
                 expected=float(expected), tolerance=float(tol),
                 detail="relative error %.3e" % err)


def _check_abs(name: str, measured: float, expected: float, tol: float) -> Check:
    err = abs(measured - expected)
    return Check(name=name, passed=bool(err <= tol), measured=float(measured),
                 expected=float(expected), tolerance=float(tol),
                 detail="absolute error %.3e" % err)


def _check_le(name: str, measured: float, bound: float, detail: str = "") -> Check:
    return Check(name=name, passed=bool(measured <= bound), measured=float(measured),
                 expected="<= %r" % float(bound), tolerance=float(bound), detail=detail)


def _check_count(name: str, count: int, detail: str = "") -> Check:
    return Check(name=name, passed=bool(count == 0), measured=int(count),
                 expected=0, tolerance=None, detail=detail)


def _check_flag(name: str, flag: bool, measured, expected, detail: str = "") -> Check:
    return Check(name=name, passed=bool(flag), measured=measured,
                 expected=expected, tolerance=None, detail=detail)


def _finish(row: str, checks, settings: dict, t0: float) -> RowResult:
    checks = tuple(checks)
    return RowResult(row=row, passed=all(c.passed for c in checks),
                     checks=checks, settings=settings,
                     seconds=time.perf_counter() - t0)


def _structured_opts(p: float) -> SolverOptions:
    """Gates for monotone geometries (paths, trees): deep accuracy is cheap."""
    if p < 2:
        return SolverOptions(tol_update=1e-10, tol_residual=1e-7)
    return SolverOptions(tol_update=1e-12, tol_residual=1e-9)


def _random_opts(p: float) -> SolverOptions:
    """Gates for random instances; p < 2 tolerates plateau stagnation."""
    if p < 2:
        return SolverOptions(tol_update=1e-10, tol_residual=1e-4)
    return SolverOptions(tol_update=1e-12, tol_residual=1e-9)


def _opts_echo(opts: SolverOptions) -> dict:
    return {"tol_update": opts.tol_update, "tol_residual": opts.tol_residual,
            "max_sweeps": opts.max_sweeps}


def _uniform(n_vertices: int, pairs) -> WeightedGraph:
    pairs = np.array(pairs, dtype=np.int64)
    m = len(pairs)
    return WeightedGraph(np.arange(n_vertices, dtype=np.int64), np.ones(n_vertices),
                         pairs, np.ones(m), np.ones(m))


# -- independent oracles -------------------------------------------------------


def _grid_capacity_path3(p: float) -> float:
    """Brute-force capacity of the 3-edge path by refined grid search.

    Minimizes a^p + |b - a|^p + (1 - b)^p over the two free values; twelve
    refinement rounds reach grid spacing ~1e-12, far below the quadratic
    basin width around the minimizer.
    """
    lo_a = lo_b = 0.0
    hi_a = hi_b = 1.0
    best = np.inf
    for _ in range(12):
        a_vals = np.linspace(lo_a, hi_a, 41)
        b_vals = np.linspace(lo_b, hi_b, 41)
        av, bv = np.meshgrid(a_vals, b_vals, indexing="ij")
        energy = np.abs(av) ** p + np.abs(bv - av) ** p + np.abs(1.0 - bv) ** p
        i, j = np.unravel_index(int(np.argmin(energy)), energy.shape)
        best = float(energy[i, j])
        da = (hi_a - lo_a) / 40.0
        db = (hi_b - lo_b) / 40.0
        lo_a, hi_a = max(0.0, a_vals[i] - 2 * da), min(1.0, a_vals[i] + 2 * da)
        lo_b, hi_b = max(0.0, b_vals[j] - 2 * db), min(1.0, b_vals[j] + 2 * db)
    return best


def _series_parallel_tree_cap(p: float, depth: int, branching: int = 2) -> float:
    """Root-to-leaves capacity of the regular tree by network reduction.

    Nonlinear resistances: series adds, parallel adds capacities; one level
    is b branches of (unit edge in series with the previous reduction).
    """
    q = 1.0 / (p - 1.0)
    r = 0.0
    for _ in range(depth):
        r = (1.0 + r) / branching ** q
    return r ** (1.0 - p)


def _tree_right_child_value(depth: int) -> float:
    """Linear-case value at the right child of the root, data 0 left / 1 right.

    By symmetry the root sits at 1/2 and each depth level of the right
    subtree is an equipotential, so the subtree collapses to a series chain
    with conductance 2^j between levels j and j+1. Exact rational arithmetic.
    """
    r_total = Fraction(1) + sum(Fraction(1, 2 ** j) for j in range(1, depth))
    current = Fraction(1, 2) / r_total
    return float(Fraction(1, 2) + current)


def _dense_quadratic_solve(g: WeightedGraph, free_mask: np.ndarray,
                           data: np.ndarray) -> np.ndarray:
    """Quadratic-case reference: assemble the weighted Laplacian and solve."""
    lap = np.zeros((g.n, g.n))
    a, b = g.edges[:, 0], g.edges[:, 1]
    np.add.at(lap, (a, b), -g.cond)
    np.add.at(lap, (b, a), -g.cond)
    np.add.at(lap, (a, a), g.cond)
    np.add.at(lap, (b, b), g.cond)
    u = data.astype(float).copy()
    fr = np.flatnonzero(free_mask)
    pn = np.flatnonzero(~free_mask)
    rhs = -lap[np.ix_(fr, pn)] @ u[pn]
    u[fr] = np.linalg.solve(lap[np.ix_(fr, fr)], rhs)
    return u


def _eigen_quotient(g: WeightedGraph, interior) -> float:
    """Smallest generalized eigenvalue of (Laplacian, measure) on `interior`."""
    lap = np.zeros((g.n, g.n))
    a, b = g.edges[:, 0], g.edges[:, 1]
    np.add.at(lap, (a, b), -g.cond)
    np.add.at(lap, (b, a), -g.cond)
    np.add.at(lap, (a, a), g.cond)
    np.add.at(lap, (b, b), g.cond)
    idx = np.asarray(sorted(int(i) for i in interior), dtype=np.int64)
    lap_ii = lap[np.ix_(idx, idx)]
    mass_ii = np.diag(g.mu[idx])
    vals = scipy.linalg.eigh(lap_ii, mass_ii, eigvals_only=True)
    return float(vals[0])


def _subtree_indicator(n: int, root_child: int = 1) -> np.ndarray:
    """Indicator of the binary subtree hanging below `root_child`, clamped."""
    f = np.zeros(n)
    stack = [root_child]
    while stack:
        v = stack.pop()
        f[v] = 1.0
        for c in (2 * v + 1, 2 * v + 2):
            if c < n:
                stack.append(c)
    return clamp(f, 0.0, 1.0)


def _fd_gradient(g: WeightedGraph, u: np.ndarray, p: float, eps: float,
                 step: float) -> np.ndarray:
    out = np.empty(g.n)
    for i in range(g.n):
        up = u.copy()
        up[i] += step
        um = u.copy()
        um[i] -= step
        out[i] = (p_energy(g, up, p, eps) - p_energy(g, um, p, eps)) / (2.0 * step)
    return out


# -- row registry ---------------------------------------------------------------


_ROWS: dict = {}


def _row(name: str):
    def register(fn):
        _ROWS[name] = fn
        return fn
    return register


@_row("path-capacities")
def _row_path_capacities(seed: int) -> RowResult:
    t0 = time.perf_counter()
    opts = SolverOptions(tol_update=1e-12, tol_residual=1e-9)
    checks = []
    for n in (2, 4, 8, 16):
        for p in P_GRID:
            g = generate("path", n)
            res = capacity(g, [0], [n], p, opts)
            checks.append(_check_rel("path(%d) p=%g capacity vs n^(1-p)" % (n, p),
                                     res.value, float(n) ** (1.0 - p), 1e-6))
    for p in P_GRID:
        g = generate("path", 3)
        res = capacity(g, [0], [3], p, opts)
        brute = _grid_capacity_path3(p)
        checks.append(_check_rel("path(3) p=%g capacity vs grid search" % p,
                                 res.value, brute, 1e-5))
    settings = {"solver": _opts_echo(opts), "sizes": [2, 4, 8, 16], "p": list(P_GRID)}
    return _finish("path-capacities", checks, settings, t0)


@_row("tree-capacities")
def _row_tree_capacities(seed: int) -> RowResult:
    t0 = time.perf_counter()
    opts = SolverOptions(tol_update=1e-12, tol_residual=1e-9)
    checks = []
    for depth, expected in ((2, 4.0 / 3.0), (3, 8.0 / 7.0), (4, 16.0 / 15.0)):
        g = generate("tree", 2, depth)
        leaves = np.arange(2 ** depth - 1, g.n)
        res = capacity(g, [0], leaves, 2.0, opts)
        checks.append(_check_rel("tree(2,%d) p=2 capacity" % depth,
                                 res.value, expected, 1e-6))
        checks.append(_check_rel("tree(2,%d) p=2 reduction oracle agrees" % depth,
                                 _series_parallel_tree_cap(2.0, depth), expected, 1e-12))
    g = generate("tree", 2, 3)
    leaves = np.arange(2 ** 3 - 1, g.n)
    res = capacity(g, [0], leaves, 3.0, opts)
    checks.append(_check_rel("tree(2,3) p=3 capacity vs reduction oracle",
                             res.value, _series_parallel_tree_cap(3.0, 3), 1e-6))
    settings = {"solver": _opts_echo(opts), "depths": [2, 3, 4]}
    return _finish("tree-capacities", checks, settings, t0)


@_row("modulus-duality")
def _row_modulus_duality(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    named = (
        ("triangle", _uniform(3, [(0, 1), (1, 2), (0, 2)]), 0, 1,
         lambda p: 1.0 + 2.0 ** (1.0 - p)),
        ("chorded-4-cycle", _uniform(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]), 0, 2,
         lambda p: 1.0 + 2.0 ** (2.0 - p)),
    )
    for name, g, s, tgt, analytic in named:
        for p in P_GRID:
            res = modulus(g, [s], [tgt], p, route="both", opts=_random_opts(p))
            checks.append(_check_rel("%s p=%g capacity vs parallel-path formula" % (name, p),
                                     res.dual_value, analytic(p), 1e-6))
            checks.append(_check_le("%s p=%g direct/dual relative gap" % (name, p),
                                    res.relative_gap, 1e-4,
                                    detail="direct %.12g dual %.12g" % (res.direct_value,
                                                                        res.dual_value)))
    rng = np.random.default_rng([seed, 3])
    worst = 0.0
    for i in range(20):
        p = P_GRID[i % 3]
        n = int(rng.integers(4, 9))
        extra = int(rng.integers(1, 4))
        g = random_connected_graph(rng, n, extra, length_range=(1.0, 1.0))
        pick = rng.choice(n, size=2, replace=False)
        res = modulus(g, [int(pick[0])], [int(pick[1])], p, route="both",
                      opts=_random_opts(p))
        worst = max(worst, float(res.relative_gap))
    checks.append(_check_le("random sweep worst direct/dual gap (20 graphs)",
                            worst, 1e-4, detail="unit lengths, p cycling %s" % (P_GRID,)))
    settings = {"seed": [seed, 3],
                "solver_p_lt_2": _opts_echo(_random_opts(1.5)),
                "solver_p_ge_2": _opts_echo(_random_opts(2.0))}
    return _finish("modulus-duality", checks, settings, t0)


@_row("solver-oracle")
def _row_solver_oracle(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    rng = np.random.default_rng([seed, 4])
    tight = SolverOptions(tol_update=1e-14, tol_residual=1e-12)
    sup_worst = 0.0
    for _ in range(50):
        n = int(rng.integers(5, 51))
        extra = int(rng.integers(0, n))
        g = random_connected_graph(rng, n, extra)
        k = int(rng.integers(1, max(2, n // 3) + 1))
        pinned = rng.choice(n, size=k, replace=False)
        free = np.ones(n, dtype=bool)
        free[pinned] = False
        data = rng.uniform(-1.0, 1.0, n)
        u, _ = solve_required(g, free, data, 2.0, tight)
        ref = _dense_quadratic_solve(g, free, data)
        sup_worst = max(sup_worst, float(np.max(np.abs(u - ref))))
    checks.append(_check_le("p=2 sup error vs dense linear solve (50 graphs)",
                            sup_worst, 1e-8))

    # p < 2 sweep gates: plateau configurations stall the update gate with the
    # residual overstating the value error (it scales like its square root
    # near ties); at tol_update 1e-8 the worst sup deviation from an
    # independent convex-optimizer reference measured 6.3e-4, so tol=1e-3
    # covers two solves with margin
    sweep_opts = {1.5: SolverOptions(tol_update=1e-8, tol_residual=1e-2),
                  2.0: SolverOptions(tol_update=1e-12, tol_residual=1e-9),
                  3.0: SolverOptions(tol_update=1e-12, tol_residual=1e-9)}
    slack = {1.5: 1e-3, 2.0: 1e-8, 3.0: 1e-8}
    mp_above = 0
    cmp_above = 0
    mp_worst = -np.inf
    cmp_worst = -np.inf
    for i in range(100):
        p = P_GRID[i % 3]
        n = int(rng.integers(5, 31))
        extra = int(rng.integers(1, 6))
        g = random_connected_graph(rng, n, extra)
        k = int(rng.integers(2, max(3, n // 4) + 1))
        pinned = rng.choice(n, size=k, replace=False)
        free = np.ones(n, dtype=bool)
        free[pinned] = False
        data1 = rng.uniform(-1.0, 1.0, n)
        data2 = data1 + rng.uniform(0.0, 0.5, n)
        res = compare(g, free, data1, data2, p, sweep_opts[p], slack=slack[p])
        hi = float(np.max(data1[pinned]))
        lo = float(np.min(data1[pinned]))
        mp_violation = max(float(np.max(res.u1)) - hi, lo - float(np.min(res.u1)))
        mp_worst = max(mp_worst, mp_violation)
        if mp_violation > 2.0 * slack[p]:
            mp_above += 1
        cmp_worst = max(cmp_worst, res.max_violation)
        if not res.satisfied:
            cmp_above += 1
    checks.append(_check_count("maximum principle violations above 2*tol (100 instances)",
                               mp_above, detail="worst excess %.3e" % mp_worst))
    checks.append(_check_count("comparison violations above 2*tol (100 instances)",
                               cmp_above, detail="worst u1-u2 %.3e" % cmp_worst))
    settings = {"seed": [seed, 4], "oracle_solver": _opts_echo(tight),
                "sweep_solver_p_lt_2": _opts_echo(sweep_opts[1.5]),
                "sweep_solver_p_ge_2": _opts_echo(sweep_opts[2.0]),
                "tol_by_p": {str(k): v for k, v in slack.items()}}
    return _finish("solver-oracle", checks, settings, t0)


@_row("gradient-check")
def _row_gradient_check(seed: int) -> RowResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 5])
    step = 1e-6
    diff_floor = 1e-2
    scale_floor = 1e-2
    worst_plain = 0.0
    worst_reg = 0.0
    coords_plain = 0
    coords_reg = 0
    for i in range(50):
        p = P_GRID[i % 3]
        n = int(rng.integers(4, 16))
        extra = int(rng.integers(1, 5))
        g = random_connected_graph(rng, n, extra)

        u = rng.uniform(-1.0, 1.0, n)
        diffs = np.abs(u[g.edges[:, 0]] - u[g.edges[:, 1]])
        analytic = energy_gradient(g, u, p)
        fd = _fd_gradient(g, u, p, 0.0, step)
        for x in range(n):
            if np.any(diffs[g.incident_edges(x)] < diff_floor):
                continue
            rel = abs(fd[x] - analytic[x]) / max(abs(analytic[x]), scale_floor)
            worst_plain = max(worst_plain, rel)
            coords_plain += 1

        # quantized data forces exact value collisions, exercising the
        # regularized energy where the plain one is nonsmooth
        uq = np.round(rng.uniform(-1.0, 1.0, n), 2)
        analytic_reg = energy_gradient(g, uq, p, eps=1e-6)
        fd_reg = _fd_gradient(g, uq, p, 1e-6, step)
        for x in range(n):
            rel = abs(fd_reg[x] - analytic_reg[x]) / max(abs(analytic_reg[x]), scale_floor)
            worst_reg = max(worst_reg, rel)
            coords_reg += 1
    checks = [
        _check_le("plain gradient vs central differences (worst rel)",
                  worst_plain, 1e-6, detail="%d coordinates" % coords_plain),
        _check_le("regularized gradient vs central differences (worst rel)",
                  worst_reg, 1e-6, detail="%d coordinates, eps=1e-6" % coords_reg),
    ]
    settings = {"seed": [seed, 5], "fd_step": step, "difference_floor": diff_floor,
                "scale_floor": scale_floor, "instances": 50}
    return _finish("gradient-check", checks, settings, t0)


@_row("parabolicity")
def _row_parabolicity(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    sizes = (3, 6, 12, 24, 48)
    tree_sizes = tuple(range(3, 11))
    # eps_par must sit above the final truncated capacity that the schedule
    # reaches (k^(1-p) decay is slow for small p); tree at p=3 levels off at
    # rate 2^(-k/2), so its relative-change window needs the looser delta
    overrides = {
        ("halfline", 1.5): {"eps_par": 0.2},
        ("halfline", 2.0): {"eps_par": 0.05},
        ("line", 1.5): {"eps_par": 0.3},
        ("line", 2.0): {"eps_par": 0.05},
        ("tree", 3.0): {"delta": 0.1},
    }

    for fam_name, factor in (("halfline", 1.0), ("line", 2.0)):
        fam = get_family(fam_name)
        for p in P_GRID:
            kw = overrides.get((fam_name, p), {})
            res = parabolicity(fam, sizes, p, opts=_structured_opts(p), **kw)
            checks.append(_check_flag(
                "%s p=%g classified parabolic" % (fam_name, p),
                res.classification == "parabolic",
                measured=res.classification, expected="parabolic",
                detail="thresholds %s" % jsonable(res.thresholds)))
            expected = factor * np.asarray(sizes, dtype=float) ** (1.0 - p)
            err = float(np.max(np.abs(res.capacities - expected) / expected))
            checks.append(_check_le(
                "%s p=%g capacity sequence vs closed form" % (fam_name, p),
                err, 1e-6))

    fam = get_family("tree")
    for p in P_GRID:
        kw = overrides.get(("tree", p), {})
        res = parabolicity(fam, tree_sizes, p, opts=_structured_opts(p), **kw)
        checks.append(_check_flag(
            "tree p=%g classified hyperbolic" % p,
            res.classification == "hyperbolic",
            measured=res.classification, expected="hyperbolic",
            detail="thresholds %s" % jsonable(res.thresholds)))
        if p == 2.0:
            caps = res.capacities
            monotone_above = bool(np.all(np.diff(caps) < 0) and np.all(caps > 1.0))
            checks.append(_check_flag(
                "tree p=2 capacities decrease monotonically toward 1",
                monotone_above, measured=[float(c) for c in caps], expected="decreasing, > 1"))
            checks.append(_check_le("tree p=2 final capacity within 2% of 1",
                                    abs(float(caps[-1]) - 1.0), 0.02))
    settings = {"sizes": list(sizes), "tree_sizes": list(tree_sizes),
                "threshold_overrides": {"%s p=%g" % k: v for k, v in overrides.items()},
                "solver_p_lt_2": _opts_echo(_structured_opts(1.5)),
                "solver_p_ge_2": _opts_echo(_structured_opts(2.0))}
    return _finish("parabolicity", checks, settings, t0)


@_row("tree-at-infinity")
def _row_tree_at_infinity(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    tr = get_family("tree").truncation(10)
    g = tr.graph
    profile = ends(g, tr.basepoint, tr.probe_radii, groups=tr.end_seeds)
    ex = exhaustion(g, tr.basepoint, tr.exhaustion_radii, warn=False)
    data = {"left": 0.0, "right": 1.0}
    oracle = _tree_right_child_value(10)
    for p in P_GRID:
        res = dirichlet_at_infinity(g, profile, data, ex, p,
                                    _structured_opts(p), cauchy_tol=0.05)
        checks.append(_check_abs("p=%g value at root (symmetry)" % p,
                                 float(res.h[0]), 0.5, 1e-6))
        for lab in profile.labels:
            devs = res.traces[lab].deviations
            checks.append(_check_le("p=%g %s-ray deviation at deepest shell" % (p, lab),
                                    float(devs[-1]), 0.02))
            tail = devs[-3:]
            checks.append(_check_flag(
                "p=%g %s-ray deviations decrease over last 3 shells" % (p, lab),
                bool(np.all(np.diff(tail) < 1e-12)),
                measured=[float(d) for d in tail], expected="decreasing"))
        if p == 2.0:
            checks.append(_check_abs("p=2 value at right child vs chain reduction",
                                     float(res.h[2]), oracle, 1e-4))
            # the chain value sits 2.44e-4 above 3/4; at this depth only the
            # looser proximity bound is meaningful
            checks.append(_check_abs("p=2 value at right child near 3/4",
                                     float(res.h[2]), 0.75, 5e-4))
    settings = {"depth": 10, "probe_radii": list(tr.probe_radii),
                "exhaustion_radii": list(tr.exhaustion_radii), "cauchy_tol": 0.05,
                "end_data": data,
                "solver_p_lt_2": _opts_echo(_structured_opts(1.5)),
                "solver_p_ge_2": _opts_echo(_structured_opts(2.0))}
    return _finish("tree-at-infinity", checks, settings, t0)


@_row("harmonic-split")
def _row_harmonic_split(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    opts = SolverOptions(tol_update=1e-14, tol_residual=1e-10)
    gaps = []
    for depth in (4, 6, 8):
        g = generate("tree", 2, depth)
        f = _subtree_indicator(g.n)
        ex = exhaustion(g, 0, tuple(range(1, depth)), warn=False)
        dec = harmonic_decompose(g, f, ex, 2.0, opts, cauchy_tol=0.05)
        checks.append(_check_le("tree(2,%d) harmonic residual on interior" % depth,
                                dec.residual_interior, 1e-8))
        gaps.append(dec.outer_gap_max)
    checks.append(_check_flag(
        "outer-sphere |g| strictly decreasing in depth",
        bool(np.all(np.diff(gaps) < 0)),
        measured=[float(x) for x in gaps], expected="strictly decreasing"))

    fam = get_family("line")
    liouville = None
    for size in (8, 16, 32):
        tr = fam.truncation(size)
        # asymmetric compactly supported bump: finite energy, no accidental
        # cancellation from mirror symmetry
        f = np.zeros(tr.graph.n)
        for offset, height in ((-2, 0.2), (-1, 0.6), (0, 1.0), (1, 0.5),
                               (2, 0.25), (3, 0.1)):
            f[tr.basepoint + offset] = height
        ex = exhaustion(tr.graph, tr.basepoint, tr.exhaustion_radii, warn=False)
        dec = harmonic_decompose(tr.graph, f, ex, 2.0, opts)
        if size == 32:
            liouville = float(np.max(np.abs(dec.h - np.mean(dec.h))))
    checks.append(_check_le("line(32) harmonic part is constant (sup |h - mean|)",
                            liouville, 1e-3))
    settings = {"p": 2.0, "depths": [4, 6, 8], "line_sizes": [8, 16, 32],
                "cauchy_tol_tree": 0.05, "cauchy_tol_line": 1e-2,
                "solver": _opts_echo(opts)}
    return _finish("harmonic-split", checks, settings, t0)


@_row("stability-sandwich")
def _row_stability_sandwich(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    rng = np.random.default_rng([seed, 9])
    tr = get_family("tree").truncation(8)
    g = tr.graph
    profile = ends(g, tr.basepoint, tr.probe_radii, groups=tr.end_seeds)
    ex = exhaustion(g, tr.basepoint, tr.exhaustion_radii, warn=False)
    eps = 0.01
    tol = {1.5: 1e-4, 2.0: 1e-6, 3.0: 1e-6}
    base = {"left": 0.0, "right": 1.0}
    for p in P_GRID:
        opts = _structured_opts(p)
        res0 = dirichlet_at_infinity(g, profile, base, ex, p, opts, cauchy_tol=0.05)
        shifted = {"left": eps, "right": 1.0 - eps}
        res1 = dirichlet_at_infinity(g, profile, shifted, ex, p, opts, cauchy_tol=0.05)
        checks.append(_check_le(
            "p=%g sup change under +/-0.01 end shift" % p,
            float(np.max(np.abs(res1.h - res0.h))), eps + 2.0 * tol[p]))
        delta = rng.uniform(-eps, eps, 2)
        jittered = {"left": float(delta[0]), "right": 1.0 + float(delta[1])}
        res2 = dirichlet_at_infinity(g, profile, jittered, ex, p, opts, cauchy_tol=0.05)
        bound = float(np.max(np.abs(delta))) + 2.0 * tol[p]
        checks.append(_check_le(
            "p=%g sup change under random end jitter" % p,
            float(np.max(np.abs(res2.h - res0.h))), bound,
            detail="jitter %s" % [float(d) for d in delta]))
    settings = {"seed": [seed, 9], "depth": 8, "eps": eps, "cauchy_tol": 0.05,
                "tol_by_p": {str(k): v for k, v in tol.items()},
                "solver_p_lt_2": _opts_echo(_structured_opts(1.5)),
                "solver_p_ge_2": _opts_echo(_structured_opts(2.0))}
    return _finish("stability-sandwich", checks, settings, t0)


@_row("calculus-inequalities")
def _row_calculus_inequalities(seed: int) -> RowResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 10])
    slack = 1e-12
    product_violations = 0
    clamp_violations = 0
    worst_product = -np.inf
    worst_clamp = -np.inf
    for _ in range(200):
        n = int(rng.integers(3, 20))
        extra = int(rng.integers(0, 6))
        g = random_connected_graph(rng, n, extra)
        u = rng.uniform(-2.0, 2.0, n)
        v = rng.uniform(-2.0, 2.0, n)
        dominating = product_upper_gradient(g, u, v)
        actual = grad(g, u * v)
        excess = float(np.max(actual - dominating))
        worst_product = max(worst_product, excess)
        product_violations += int(np.count_nonzero(actual > dominating + slack))
        lo, hi = sorted(rng.uniform(-1.5, 1.5, 2))
        clip_drop = grad(g, clamp(u, lo, hi)) - grad(g, u)
        excess = float(np.max(clip_drop))
        worst_clamp = max(worst_clamp, excess)
        clamp_violations += int(np.count_nonzero(clip_drop > slack))
    checks = [
        _check_count("product bound violations (200 instances, edgewise)",
                     product_violations, detail="worst excess %.3e" % worst_product),
        _check_count("clamp contraction violations (200 instances, edgewise)",
                     clamp_violations, detail="worst excess %.3e" % worst_clamp),
    ]
    settings = {"seed": [seed, 10], "slack": slack, "instances": 200}
    return _finish("calculus-inequalities", checks, settings, t0)


@_row("sobolev-constants")
def _row_sobolev_constants(seed: int) -> RowResult:
    t0 = time.perf_counter()
    checks = []
    g2 = generate("path", 2)
    for p in P_GRID:
        res = sobolev_constant(g2, [1], p, seed=seed)
        checks.append(_check_abs("one-free-vertex path p=%g equals 2" % p,
                                 res.value, 2.0, 1e-9))
    for n in range(2, 9):
        g = generate("path", n)
        interior = list(range(1, n))
        res = sobolev_constant(g, interior, 2.0, seed=seed)
        checks.append(_check_rel("path(%d) p=2 vs smallest eigenvalue" % n,
                                 res.value, _eigen_quotient(g, interior), 1e-6))
    values = []
    fam = get_family("halfline")
    for size in (4, 8, 16, 32):
        tr = fam.truncation(size)
        interior = np.setdiff1d(np.arange(tr.graph.n), tr.sink)
        res = sobolev_constant(tr.graph, interior, 2.0, seed=seed)
        values.append(res.value)
    checks.append(_check_flag(
        "halfline p=2 constants strictly decreasing over sizes",
        bool(np.all(np.diff(values) < 0)),
        measured=[float(v) for v in values], expected="strictly decreasing"))
    settings = {"seed": seed, "path_sizes": list(range(2, 9)),
                "halfline_sizes": [4, 8, 16, 32]}
    return _finish("sobolev-constants", checks, settings, t0)


def _row_determinism(seed: int, baseline: dict | None = None) -> RowResult:
    t0 = time.perf_counter()
    names = [n for n in _ROWS if n != "determinism"]
    if baseline is not None and all(n in baseline for n in names):
        first = {n: baseline[n] for n in names}
    else:
        first = {n: canonical_json(_ROWS[n](seed).payload()) for n in names}
    second = {n: canonical_json(_ROWS[n](seed).payload()) for n in names}
    mismatched = [n for n in names if first[n] != second[n]]
    checks = [
        Check(name="rows compared", passed=len(names) == len(_ROWS) - 1,
              measured=len(names), expected=len(_ROWS) - 1),
        _check_count("rows with payload byte differences", len(mismatched),
                     detail="mismatched: %s" % (mismatched or "none")),
    ]
    settings = {"seed": seed, "rows": names}
    return _finish("determinism", checks, settings, t0)


_ROWS["determinism"] = _row_determinism

ROW_NAMES = tuple(_ROWS)

SUITES = {
    "all": ROW_NAMES,
    "capacities": ("path-capacities", "tree-capacities"),
    "duality": ("modulus-duality",),
    "solver": ("solver-oracle", "gradient-check"),
    "parabolicity": ("parabolicity",),
    "infinity": ("tree-at-infinity", "stability-sandwich"),
    "decomposition": ("harmonic-split",),
    "calculus": ("calculus-inequalities",),
    "sobolev": ("sobolev-constants",),
    "determinism": ("determinism",),
}


def run_acceptance(rows=None, seed: int = 0) -> list[RowResult]:
    """Run acceptance rows (all by default) and return their results.

    The determinism row is run last; when every other row was just computed
    in this call, those payloads serve as its first run, so the pass still
    compares two complete evaluations.
    """
    requested = list(ROW_NAMES) if rows is None else list(rows)
    unknown = [r for r in requested if r not in _ROWS]
    if unknown:
        raise ValueError("unknown acceptance rows %s; known rows: %s"
                         % (unknown, ", ".join(ROW_NAMES)))
    ordered = [n for n in ROW_NAMES if n in requested and n != "determinism"]
    results = []
    baseline = {}
    for name in ordered:
        res = _ROWS[name](seed)
        results.append(res)
        baseline[name] = canonical_json(res.payload())
    if "determinism" in requested:
        use = baseline if len(baseline) == len(_ROWS) - 1 else None
        results.append(_row_determinism(seed, baseline=use))
    return results


def suite_rows(suite: str) -> tuple[str, ...]:
    """Row names for a named suite; raises ValueError listing valid names."""
    if suite not in SUITES:
        raise ValueError("unknown suite %r; available: %s"
                         % (suite, ", ".join(SUITES)))
    return SUITES[suite]


def format_table(results) -> str:
    """Human-readable pass/fail table, one line per check."""
    lines = []
    for res in results:
        lines.append("[%s] %s  (%d checks, %.2fs)"
                     % ("PASS" if res.passed else "FAIL", res.row,
                        len(res.checks), res.seconds))
        for c in res.checks:
            tol = "" if c.tolerance is None else "  tol=%g" % c.tolerance
            lines.append("  %-4s %s: measured=%s expected=%s%s%s"
                         % ("ok" if c.passed else "FAIL", c.name, c.measured,
                            c.expected, tol,
                            ("  [%s]" % c.detail) if c.detail else ""))
    passed = sum(1 for r in results if r.passed)
    lines.append("%d/%d rows passed" % (passed, len(results)))
    return "\n".join(lines)
