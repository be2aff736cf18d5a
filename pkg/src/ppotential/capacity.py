"""Condenser capacity, path-family modulus, Sobolev constants, parabolicity.

Capacity is computed through the Dirichlet solver; modulus gets two
independent routes (a dual one through the capacity potential and a direct
one by convex descent over enumerated paths) so the classical duality can be
checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ._util import run_indexed
from .calculus import grad, p_energy
from .dirichlet import SolveError, SolverOptions, SolveReport, solve_required
from .families import Family
from .graph import GraphValidationError, WeightedGraph


class PathCapExceeded(RuntimeError):
    """Path enumeration hit the configured cap before finishing."""


def _vertex_set(g: WeightedGraph, ids, name: str) -> np.ndarray:
    arr = np.unique(np.asarray(ids, dtype=np.int64).reshape(-1))
    if arr.size == 0:
        raise GraphValidationError("%s set is empty" % name)
    if arr.min() < 0 or arr.max() >= g.n:
        raise GraphValidationError("%s set has vertices out of range" % name)
    return arr


@dataclass(frozen=True)
class CapacityResult:
    """Condenser capacity with its extremal potential."""

    value: float
    potential: np.ndarray
    source: np.ndarray
    sink: np.ndarray
    p: float
    report: SolveReport


def capacity(g: WeightedGraph, source, sink, p: float,
             opts: SolverOptions | None = None) -> CapacityResult:
    """p-capacity of the condenser (source, sink).

    Minimizes the p-energy over functions that are 1 on `source` and 0 on
    `sink`; the minimizer is the returned potential and the value is its
    energy. Potentials take values in [0, 1] (maximum principle).

    Raises
    ------
    GraphValidationError
        Empty or overlapping source/sink.
    SolveError
        The underlying relaxation did not converge.
    """
    source = _vertex_set(g, source, "source")
    sink = _vertex_set(g, sink, "sink")
    if np.intersect1d(source, sink).size:
        raise GraphValidationError("source and sink overlap")
    free = np.ones(g.n, dtype=bool)
    free[source] = False
    free[sink] = False
    data = np.zeros(g.n)
    data[source] = 1.0
    u, report = solve_required(g, free, data, p, opts)
    return CapacityResult(
        value=p_energy(g, u, p),
        potential=u,
        source=source,
        sink=sink,
        p=float(p),
        report=report,
    )


# -- path enumeration and the direct modulus route ---------------------------


def enumerate_paths(g: WeightedGraph, source: np.ndarray, sink: np.ndarray,
                    cap: int = 10_000) -> list[np.ndarray]:
    """All simple source-to-sink paths whose interiors avoid both plates.

    Returns one edge-index array per path, in a fixed deterministic order
    (DFS from each source vertex, neighbors ascending). Raises
    `PathCapExceeded` naming the cap as soon as more paths exist than `cap`.
    """
    source_mask = np.zeros(g.n, dtype=bool)
    source_mask[source] = True
    sink_mask = np.zeros(g.n, dtype=bool)
    sink_mask[sink] = True
    paths: list[np.ndarray] = []

    on_path = np.zeros(g.n, dtype=bool)
    for s in source:
        s = int(s)
        on_path[s] = True
        # Stack holds (vertex, adjacency cursor); edge_trail mirrors the stack.
        stack = [(s, 0)]
        edge_trail: list[int] = []
        while stack:
            x, cursor = stack[-1]
            lo, hi = g.indptr[x], g.indptr[x + 1]
            if cursor == hi - lo:
                stack.pop()
                on_path[x] = False
                if edge_trail:
                    edge_trail.pop()
                continue
            stack[-1] = (x, cursor + 1)
            y = int(g.adj_vertex[lo + cursor])
            e = int(g.adj_edge[lo + cursor])
            if sink_mask[y]:
                if len(paths) >= cap:
                    raise PathCapExceeded(
                        "more than %d source-sink paths; raise the cap or use the dual route"
                        % cap)
                paths.append(np.array(edge_trail + [e], dtype=np.int64))
                continue
            if on_path[y] or source_mask[y]:
                continue
            on_path[y] = True
            stack.append((y, 0))
            edge_trail.append(e)
        on_path[s] = False
    return paths


def _project_polytope(x: np.ndarray, A: np.ndarray, row_norm_sq: np.ndarray,
                      tol: float = 1e-13, max_cycles: int = 2000) -> np.ndarray:
    """Dykstra projection onto {A r >= 1, r >= 0}.

    One correction vector per constraint (plus the orthant); cycles until the
    iterate stops moving. Exact enough that feasibility violations stay below
    solver noise.
    """
    K = A.shape[0]
    corrections = np.zeros((K + 1, x.size))
    x = x.copy()
    for _ in range(max_cycles):
        moved = 0.0
        for i in range(K):
            y = x + corrections[i]
            slack = A[i] @ y - 1.0
            if slack < 0.0:
                proj = y - slack / row_norm_sq[i] * A[i]
            else:
                proj = y
            corrections[i] = y - proj
            moved = max(moved, float(np.max(np.abs(proj - x))))
            x = proj
        y = x + corrections[K]
        proj = np.maximum(y, 0.0)
        corrections[K] = y - proj
        moved = max(moved, float(np.max(np.abs(proj - x))))
        x = proj
        if moved < tol:
            break
    return x


def _direct_modulus(g: WeightedGraph, paths: list[np.ndarray], p: float,
                    max_iters: int = 20_000, tol: float = 1e-13
                    ) -> tuple[float, np.ndarray, int]:
    """Minimize sum c rho^p over admissible densities by projected descent.

    Admissibility: sum of length * rho over each enumerated path >= 1, rho >= 0.
    Starts from the neutral admissible density rho = 1 / (shortest path
    length) and keeps the best feasible iterate. Gradient steps with Armijo
    backtracking; projection by `_project_polytope`.
    """
    m = g.m
    A = np.zeros((len(paths), m))
    for i, edge_idx in enumerate(paths):
        A[i, edge_idx] = g.length[edge_idx]
    row_norm_sq = np.einsum("ij,ij->i", A, A)
    lmin = float(np.min(A.sum(axis=1)))
    rho = np.full(m, 1.0 / lmin)

    def mass(r):
        return float(np.sum(g.cond * r ** p))

    def grad_mass(r):
        return p * g.cond * r ** (p - 1.0)

    def feasible(r):
        return float(np.min(A @ r)) >= 1.0 - 1e-9 and float(np.min(r)) >= -1e-12

    best = rho.copy()
    best_mass = mass(rho)
    f_cur = best_mass
    step = 1.0 / max(1.0, float(np.max(grad_mass(rho))))
    stall = 0
    iters = 0
    for iters in range(1, max_iters + 1):
        gvec = grad_mass(rho)
        accepted = False
        move = 0.0
        for _ in range(60):
            cand = _project_polytope(rho - step * gvec, A, row_norm_sq)
            fc = mass(cand)
            move = float(np.max(np.abs(cand - rho)))
            if fc < f_cur - 1e-16 * (1.0 + f_cur):
                accepted = True
                break
            if move < 1e-15:
                break
            step *= 0.5
        if not accepted:
            break
        if f_cur - fc < tol * (1.0 + f_cur):
            stall += 1
        else:
            stall = 0
        rho = cand
        f_cur = fc
        if feasible(rho) and fc < best_mass:
            best = rho.copy()
            best_mass = fc
        step *= 1.25
        if move < 1e-13 or stall >= 30:
            break
    return best_mass, best, iters


@dataclass(frozen=True)
class ModulusResult:
    """p-modulus of the source-sink path family.

    `value` follows the requested route (direct mass when available, else the
    dual capacity value). `min_slack` is min over enumerated paths of the
    admissibility margin sum(length * rho) - 1 for the returned density;
    None when enumeration was skipped or refused.
    """

    value: float
    density: np.ndarray
    route: str
    p: float
    path_count: int | None
    min_slack: float | None
    direct_value: float | None
    dual_value: float | None
    dual_mass: float | None
    relative_gap: float | None
    iterations: int | None


def modulus(g: WeightedGraph, source, sink, p: float, route: str = "both",
            path_cap: int = 10_000,
            opts: SolverOptions | None = None) -> ModulusResult:
    """p-modulus of the family of source-sink paths.

    Routes
    ------
    ``"dual"``   : capacity potential's gradient as density; reports the
                   capacity value (exact duality at unit edge lengths).
    ``"direct"`` : enumerate simple paths (refusing beyond `path_cap`) and
                   run projected descent on the admissibility polytope.
    ``"both"``   : run both, report the direct value and the relative gap.

    The two routes share no machinery, so their agreement is evidence, not
    tautology.
    """
    if route not in ("dual", "direct", "both"):
        raise GraphValidationError("route must be dual, direct or both, got %r" % route)
    source = _vertex_set(g, source, "source")
    sink = _vertex_set(g, sink, "sink")
    if np.intersect1d(source, sink).size:
        raise GraphValidationError("source and sink overlap")

    paths = None
    if route in ("direct", "both"):
        paths = enumerate_paths(g, source, sink, cap=path_cap)
        if not paths:
            raise GraphValidationError("no source-sink paths to measure")
    elif route == "dual":
        try:
            paths = enumerate_paths(g, source, sink, cap=path_cap)
        except PathCapExceeded:
            paths = None

    direct_value = dual_value = dual_mass = None
    iterations = None
    if route in ("direct", "both"):
        direct_value, density, iterations = _direct_modulus(g, paths, p)
    if route in ("dual", "both"):
        cap_res = capacity(g, source, sink, p, opts)
        dual_density = grad(g, cap_res.potential)
        dual_value = cap_res.value
        dual_mass = float(np.sum(g.cond * dual_density ** p))
        if route == "dual":
            density = dual_density

    value = direct_value if direct_value is not None else dual_value
    rel_gap = None
    if direct_value is not None and dual_value is not None:
        rel_gap = abs(direct_value - dual_value) / max(abs(dual_value), 1e-300)

    min_slack = None
    if paths is not None:
        margins = [float(np.sum(g.length[e] * density[e])) - 1.0 for e in paths]
        min_slack = min(margins)

    return ModulusResult(
        value=float(value),
        density=density,
        route=route,
        p=float(p),
        path_count=len(paths) if paths is not None else None,
        min_slack=min_slack,
        direct_value=direct_value,
        dual_value=dual_value,
        dual_mass=dual_mass,
        relative_gap=rel_gap,
        iterations=iterations,
    )


# -- Sobolev constant ---------------------------------------------------------


@dataclass(frozen=True)
class SobolevResult:
    """Upper bound for the p-Sobolev constant of an interior set.

    `value` is the smallest Rayleigh quotient found over all starts; it is an
    upper bound for the true infimum by construction. `minimizer` has unit
    p-norm and vanishes off the interior.
    """

    value: float
    minimizer: np.ndarray
    p: float
    interior: np.ndarray
    start_values: tuple[float, ...]
    sweeps: int


def _quotient(g: WeightedGraph, u: np.ndarray, p: float) -> float:
    return p_energy(g, u, p) / float(np.sum(g.mu * np.abs(u) ** p))


def _coordinate_quotient_min(g: WeightedGraph, u: np.ndarray, interior: np.ndarray,
                             p: float, max_sweeps: int, tol: float) -> tuple[np.ndarray, int]:
    """Cyclic 1-D quotient minimization with per-sweep renormalization."""
    u = u.copy()
    prev = _quotient(g, u, p)
    flat = 0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for x in interior:
            x = int(x)
            nbrs = g.adj_vertex[g.indptr[x]:g.indptr[x + 1]]
            conds = g.cond[g.adj_edge[g.indptr[x]:g.indptr[x + 1]]]
            vals = u[nbrs]
            old = u[x]
            e_here = float(np.sum(conds * np.abs(old - vals) ** p))
            e_rest = p_energy(g, u, p) - e_here
            m_rest = float(np.sum(g.mu * np.abs(u) ** p)) - g.mu[x] * abs(old) ** p

            def ratio(t):
                num = e_rest + float(np.sum(conds * np.abs(t - vals) ** p))
                den = m_rest + g.mu[x] * abs(t) ** p
                return num / den

            lo = min(0.0, float(vals.min()), old)
            hi = max(0.0, float(vals.max()), old)
            pad = (hi - lo) + 1.0
            lo, hi = lo - pad, hi + pad
            # Coarse scan guards against non-unimodal sections, then Brent.
            ts = np.linspace(lo, hi, 17)
            vals_scan = [ratio(t) for t in ts]
            k = int(np.argmin(vals_scan))
            a = ts[max(0, k - 1)]
            b = ts[min(len(ts) - 1, k + 1)]
            res = minimize_scalar(ratio, bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-14})
            cands = [old, float(res.x)]
            if p == 2.0:
                # Stationarity is a quadratic: (N'D - N D')(t) = 0 with
                # N = a2 t^2 + b2 t + c2 and D = d2 t^2 + e2.
                a2 = float(np.sum(conds))
                b2 = -2.0 * float(np.sum(conds * vals))
                c2 = float(np.sum(conds * vals ** 2)) + e_rest
                d2 = float(g.mu[x])
                e2 = m_rest
                qa, qb, qc = -b2 * d2, 2.0 * (a2 * e2 - c2 * d2), b2 * e2
                if abs(qa) > 0:
                    disc = qb * qb - 4.0 * qa * qc
                    if disc >= 0:
                        r = np.sqrt(disc)
                        cands.extend([(-qb + r) / (2 * qa), (-qb - r) / (2 * qa)])
                elif abs(qb) > 0:
                    cands.append(-qc / qb)
            best_t = min(cands, key=ratio)
            u[x] = best_t
        norm = float(np.sum(g.mu * np.abs(u) ** p)) ** (1.0 / p)
        u /= norm
        cur = _quotient(g, u, p)
        if abs(prev - cur) <= tol * (1.0 + abs(cur)):
            flat += 1
            if flat >= 3:
                break
        else:
            flat = 0
        prev = cur
    return u, sweeps


def sobolev_constant(g: WeightedGraph, interior, p: float,
                     max_sweeps: int = 2000, tol: float = 1e-13,
                     seed: int = 0, random_starts: int = 2,
                     extra_starts=None) -> SobolevResult:
    """Best Rayleigh quotient E_p(u) / ||u||_p^p over u supported in `interior`.

    Relaxes one coordinate at a time on the quotient itself (renormalizing
    each sweep) from several deterministic starts: the flat function, the
    indicator of the weakest interior vertex, and seeded random vectors;
    `extra_starts` adds caller-supplied vectors. The reported value is an
    upper bound for the true constant, tight on the instances where an
    independent eigenvalue check is available.

    Raises
    ------
    GraphValidationError
        Empty interior, or interior covering the whole vertex set.
    """
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    interior = _vertex_set(g, interior, "interior")
    if interior.size >= g.n:
        raise GraphValidationError("interior must omit at least one vertex")

    starts = []
    flat = np.zeros(g.n)
    flat[interior] = 1.0
    starts.append(flat)
    # Indicator of the interior vertex cheapest to lift: min weighted degree
    # over measure, the quotient an indicator itself achieves.
    ratios = []
    for x in interior:
        x = int(x)
        conds = g.cond[g.adj_edge[g.indptr[x]:g.indptr[x + 1]]]
        ratios.append(float(np.sum(conds)) / float(g.mu[x]))
    spike = np.zeros(g.n)
    spike[int(interior[int(np.argmin(ratios))])] = 1.0
    starts.append(spike)
    rng = np.random.default_rng(seed)
    for _ in range(max(0, int(random_starts))):
        v = np.zeros(g.n)
        v[interior] = rng.uniform(-1.0, 1.0, interior.size)
        if not np.any(v[interior]):
            v[interior] = 1.0
        starts.append(v)
    if extra_starts is not None:
        for v in extra_starts:
            v = np.asarray(v, dtype=np.float64).copy()
            if v.shape != (g.n,):
                raise ValueError("extra start has wrong shape")
            mask = np.ones(g.n, dtype=bool)
            mask[interior] = False
            v[mask] = 0.0
            if not np.any(v):
                raise ValueError("extra start vanishes on the interior")
            starts.append(v)

    best_u = None
    best_val = np.inf
    start_values = []
    total_sweeps = 0
    for v in starts:
        u, sweeps = _coordinate_quotient_min(g, v, interior, p, max_sweeps, tol)
        total_sweeps += sweeps
        val = _quotient(g, u, p)
        start_values.append(val)
        if val < best_val:
            best_val = val
            best_u = u
    return SobolevResult(
        value=float(best_val),
        minimizer=best_u,
        p=float(p),
        interior=interior,
        start_values=tuple(float(v) for v in start_values),
        sweeps=total_sweeps,
    )


# -- parabolicity -------------------------------------------------------------


@dataclass(frozen=True)
class ParabolicityResult:
    """Classification of an infinite family from truncated capacities.

    `capacities` holds cap(basepoint, outer boundary) per size. Parabolic
    means the sequence decays to zero (log-log slope at most -sigma and final
    value below eps_par); hyperbolic means it levels off at a positive value
    (relative change over the last `window` sizes below delta, final value at
    least eps_par); anything else is undetermined. Thresholds are echoed.
    """

    family: str
    branching: int | None
    p: float
    sizes: tuple[int, ...]
    capacities: np.ndarray
    slope: float
    classification: str
    thresholds: dict
    monotone: bool


def parabolicity(family: Family, sizes, p: float,
                 sigma: float = 0.1, eps_par: float = 1e-2, delta: float = 1e-2,
                 window: int = 3, opts: SolverOptions | None = None,
                 threads: int | None = None) -> ParabolicityResult:
    """Classify a family as parabolic or hyperbolic from capacity decay.

    Computes cap_p(basepoint, outer boundary) on each truncation (independent
    solves, parallelizable via PPOTENTIAL_THREADS), checks the sequence is
    nonincreasing, fits a log-log slope and applies the threshold rules. A
    non-monotone sequence is reported undetermined rather than trusted.
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2:
        raise GraphValidationError("parabolicity needs at least two sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise GraphValidationError("sizes must be strictly increasing")
    if window < 2:
        raise GraphValidationError("window must be >= 2")

    def task(size):
        def run():
            tr = family.truncation(size)
            use = opts
            if p != 2.0:
                # continuation: the quadratic potential is cheap (closed-form
                # coordinate updates) and an excellent start for other p; on
                # path-like truncations it is already the exact minimizer
                warm = capacity(tr.graph, [tr.basepoint], tr.sink, 2.0, opts)
                use = (opts or SolverOptions()).with_initial(warm.potential)
            res = capacity(tr.graph, [tr.basepoint], tr.sink, p, use)
            return res.value
        return run

    caps = np.array(run_indexed([task(s) for s in sizes], threads))

    monotone = bool(np.all(np.diff(caps) <= 1e-9 * (1.0 + caps[:-1])))
    slope = float(np.polyfit(np.log(sizes), np.log(caps), 1)[0])

    if not monotone:
        classification = "undetermined"
    elif slope <= -sigma and caps[-1] < eps_par:
        classification = "parabolic"
    elif len(sizes) >= window and caps[-1] >= eps_par and \
            (caps[-window] - caps[-1]) / caps[-window] < delta:
        classification = "hyperbolic"
    else:
        classification = "undetermined"

    return ParabolicityResult(
        family=family.name,
        branching=family.branching,
        p=float(p),
        sizes=sizes,
        capacities=caps,
        slope=slope,
        classification=classification,
        thresholds={"sigma": sigma, "eps_par": eps_par, "delta": delta, "window": window},
        monotone=monotone,
    )
