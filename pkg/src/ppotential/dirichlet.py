"""p-Dirichlet problems: coordinate relaxation, residuals, comparison.

The solver fixes a function on the pinned vertices and relaxes the free ones
by exact 1-D energy minimization (Gauss-Seidel order, ascending index). Every
update stays inside the bracket of neighbor values, so solutions satisfy the
maximum principle by construction and the energy never increases.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .calculus import _check_function
from .graph import WeightedGraph


class SolveError(RuntimeError):
    """A solve was ill-posed or did not converge where convergence is required."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and controls for the relaxation solver.

    Convergence requires both gates in the same sweep: max coordinate update
    below `tol_update` and free residual below `tol_residual`. `initial`
    optionally warm-starts the free values (full-length array; pinned entries
    are ignored).
    """

    tol_update: float = 1e-10
    tol_residual: float = 1e-8
    max_sweeps: int = 1_000_000
    bisect_steps: int = 200
    bisect_width: float = 1e-14
    initial: np.ndarray | None = None

    def with_initial(self, initial) -> "SolverOptions":
        return replace(self, initial=initial)


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one relaxation solve.

    `energy` is the p-energy after each sweep; it is nonincreasing up to
    roundoff. `residual` is the final sup norm of the discrete p-Laplacian
    over the free set.
    """

    sweeps: int
    max_update: float
    residual: float
    energy: np.ndarray
    converged: bool
    p: float
    tol_update: float
    tol_residual: float

    def energy_nonincreasing(self, slack: float = 1e-9) -> bool:
        if self.energy.size < 2:
            return True
        allowed = slack * (1.0 + float(self.energy[0]))
        return bool(np.all(np.diff(self.energy) <= allowed))


def _free_set(g: WeightedGraph, free) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a free-vertex selection to (sorted indices, bool mask)."""
    arr = np.asarray(free)
    if arr.dtype == bool:
        if arr.shape != (g.n,):
            raise ValueError("free mask shape %s does not match %d vertices" % (arr.shape, g.n))
        mask = arr.copy()
    else:
        idx = np.unique(arr.astype(np.int64)) if arr.size else np.empty(0, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= g.n):
            raise ValueError("free vertex index out of range")
        mask = np.zeros(g.n, dtype=bool)
        mask[idx] = True
    return np.flatnonzero(mask), mask


def _check_reachability(g: WeightedGraph, free_mask: np.ndarray) -> None:
    """Every free vertex must reach a pinned vertex without leaving the free set."""
    seeds = [
        x for x in np.flatnonzero(free_mask)
        if np.any(~free_mask[g.neighbors(x)])
    ]
    reached = np.zeros(g.n, dtype=bool)
    stack = list(seeds)
    for x in seeds:
        reached[x] = True
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            y = int(y)
            if free_mask[y] and not reached[y]:
                reached[y] = True
                stack.append(y)
    orphaned = np.flatnonzero(free_mask & ~reached)
    if orphaned.size:
        raise SolveError(
            "free vertex %d cannot see any pinned value; problem is ill-posed"
            % int(orphaned[0]))


def solve_dirichlet(g: WeightedGraph, free, data, p: float,
                    opts: SolverOptions | None = None) -> tuple[np.ndarray, SolveReport]:
    """Minimize the p-energy over functions pinned to `data` off the free set.

    Parameters
    ----------
    g : WeightedGraph
    free : array_like
        Free vertices, as indices or a boolean mask. Values of `data` on the
        free set are ignored unless used as a warm start via `opts.initial`.
    data : array_like
        Full-length function; the returned solution equals `data` exactly
        outside the free set.
    p : float
        Exponent, p > 1.
    opts : SolverOptions, optional

    Returns
    -------
    (u, report) : (ndarray, SolveReport)
        `u` is the relaxed function; check ``report.converged``. Free values
        lie within [min, max] of the data seen by the free region.

    Raises
    ------
    SolveError
        No pinned vertices, or a free vertex with no path to a pinned one
        inside the free set.
    ValueError
        p <= 1 or malformed arrays.
    """
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    opts = opts or DEFAULT_OPTIONS
    data = _check_function(g, data)
    free_idx, free_mask = _free_set(g, free)

    if free_idx.size == 0:
        u = data.copy()
        energy = np.array([_kernels._total_energy(u, g.edge_a, g.edge_b, g.cond, p)])
        report = SolveReport(0, 0.0, 0.0, energy, True, p,
                             opts.tol_update, opts.tol_residual)
        return u, report
    if free_mask.all():
        raise SolveError("no pinned vertices; problem is ill-posed")
    _check_reachability(g, free_mask)

    u = data.copy()
    if opts.initial is not None:
        init = _check_function(g, opts.initial)
        u[free_idx] = init[free_idx]
    else:
        ring = np.unique(np.concatenate([
            g.neighbors(int(x))[~free_mask[g.neighbors(int(x))]] for x in free_idx
        ]))
        u[free_idx] = float(np.mean(data[ring]))

    sweeps, max_update, res, converged, energy = _kernels.gauss_seidel(
        u, g.indptr, g.adj_vertex, g.adj_edge, g.cond,
        g.edge_a, g.edge_b, g.cond,
        free_idx, float(p),
        float(opts.tol_update), float(opts.tol_residual), int(opts.max_sweeps),
        int(opts.bisect_steps), float(opts.bisect_width),
    )
    report = SolveReport(int(sweeps), float(max_update), float(res), energy,
                         bool(converged), float(p),
                         opts.tol_update, opts.tol_residual)
    return u, report


def residual(g: WeightedGraph, u, p: float, free) -> float:
    """Sup norm of the discrete p-Laplacian of `u` over the free set.

    At each free x this is |sum_{y~x} c_xy |u(y)-u(x)|^(p-2) (u(y)-u(x))|;
    the reported value is the maximum over free vertices.
    """
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    u = _check_function(g, u)
    free_idx, _ = _free_set(g, free)
    if free_idx.size == 0:
        raise ValueError("residual needs a nonempty free set")
    a, b = g.edges[:, 0], g.edges[:, 1]
    t = u[b] - u[a]
    w = g.cond * np.sign(t) * np.abs(t) ** (p - 1.0)
    acc = np.zeros(g.n)
    np.add.at(acc, a, w)
    np.add.at(acc, b, -w)
    return float(np.max(np.abs(acc[free_idx])))


def solve_required(g: WeightedGraph, free, data, p: float,
                   opts: SolverOptions | None = None) -> tuple[np.ndarray, SolveReport]:
    """`solve_dirichlet` that raises `SolveError` unless the solve converged."""
    u, report = solve_dirichlet(g, free, data, p, opts)
    if not report.converged:
        raise SolveError(
            "solve did not converge in %d sweeps (update %.3e, residual %.3e)"
            % (report.sweeps, report.max_update, report.residual),
            report=report)
    return u, report


@dataclass(frozen=True)
class CompareResult:
    """Certificate for the comparison principle between two solves."""

    u1: np.ndarray
    u2: np.ndarray
    max_violation: float
    threshold: float
    satisfied: bool


def compare(g: WeightedGraph, free, data1, data2, p: float,
            opts: SolverOptions | None = None,
            slack: float = 1e-8) -> CompareResult:
    """Solve with both data sets and certify pointwise ordering.

    Requires ``data1 <= data2`` on the pinned set. The certificate threshold
    is ``2 * slack``, covering the numerical error of two solves at default
    tolerances; `max_violation` is max(u1 - u2) over all vertices.
    """
    data1 = _check_function(g, data1)
    data2 = _check_function(g, data2)
    _, free_mask = _free_set(g, free)
    pinned = ~free_mask
    gap = data1[pinned] - data2[pinned]
    if gap.size and float(np.max(gap)) > 0:
        raise ValueError("comparison requires data1 <= data2 on pinned vertices")
    u1, _ = solve_required(g, free, data1, p, opts)
    u2, _ = solve_required(g, free, data2, p, opts)
    violation = float(np.max(u1 - u2))
    threshold = 2.0 * slack
    return CompareResult(u1, u2, violation, threshold, violation <= threshold)
