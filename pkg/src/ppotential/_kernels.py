"""Compiled inner loops for the coordinate-relaxation solver.

The kernels are deterministic: fixed ascending sweep order, fastmath off,
no threading inside a single solve. They release the GIL so independent
solves can run on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _sgnpow(t, q):
    """sign(t) * |t|^q with sgnpow(0) = 0 (q > 0)."""
    if t > 0.0:
        return t ** q
    if t < 0.0:
        return -((-t) ** q)
    return 0.0


@njit(cache=True, nogil=True)
def _coordinate_root(u, indptr, adj_vertex, adj_edge, cond, x, p, lo, hi,
                     max_steps, width_tol):
    """Root of t -> sum_y c_xy sgnpow(t - u_y, p-1) in [lo, hi] by bisection.

    The map is continuous and nondecreasing, <= 0 at lo and >= 0 at hi, so
    the bracket never breaks. Stops after `max_steps` halvings or when the
    bracket is narrower than `width_tol`.
    """
    a = lo
    b = hi
    q = p - 1.0
    for _ in range(max_steps):
        if b - a < width_tol:
            break
        mid = 0.5 * (a + b)
        s = 0.0
        for k in range(indptr[x], indptr[x + 1]):
            s += cond[adj_edge[k]] * _sgnpow(mid - u[adj_vertex[k]], q)
        if s > 0.0:
            b = mid
        elif s < 0.0:
            a = mid
        else:
            return mid
    return 0.5 * (a + b)


@njit(cache=True, nogil=True)
def _free_residual(u, indptr, adj_vertex, adj_edge, cond, free, p):
    """max over free x of |sum_y c_xy sgnpow(u_y - u_x, p-1)|."""
    q = p - 1.0
    worst = 0.0
    for i in range(free.shape[0]):
        x = free[i]
        s = 0.0
        for k in range(indptr[x], indptr[x + 1]):
            s += cond[adj_edge[k]] * _sgnpow(u[adj_vertex[k]] - u[x], q)
        if abs(s) > worst:
            worst = abs(s)
    return worst


@njit(cache=True, nogil=True)
def _total_energy(u, edges_a, edges_b, edges_c, p):
    total = 0.0
    for k in range(edges_a.shape[0]):
        d = u[edges_a[k]] - u[edges_b[k]]
        if p == 2.0:
            total += edges_c[k] * d * d
        else:
            total += edges_c[k] * abs(d) ** p
    return total


@njit(cache=True, nogil=True)
def gauss_seidel(u, indptr, adj_vertex, adj_edge, cond,
                 edges_a, edges_b, edges_c, free, p,
                 tol_update, tol_residual, max_sweeps, bisect_steps, bisect_width):
    """Relax free coordinates in ascending order until both gates pass.

    Mutates `u` in place. Each coordinate update solves the 1-D minimization
    exactly (weighted mean at p = 2, monotone bisection otherwise); updates
    always land inside the bracket of neighbor values, so min/max bounds of
    the data are preserved sweep by sweep.

    Returns (sweeps, max_update, residual, converged, energy_trajectory).
    """
    energy = np.empty(max_sweeps)
    sweeps = 0
    max_update = 0.0
    residual = np.inf
    converged = False
    # Stagnation guard: once updates are below gate but the residual has
    # stopped improving (bisection resolution floor for p < 2), further
    # sweeps cannot help; abort and report non-convergence honestly.
    stagnant = 0
    best_residual = np.inf
    for sweep in range(max_sweeps):
        max_update = 0.0
        for i in range(free.shape[0]):
            x = free[i]
            lo = np.inf
            hi = -np.inf
            for k in range(indptr[x], indptr[x + 1]):
                v = u[adj_vertex[k]]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if p == 2.0:
                num = 0.0
                den = 0.0
                for k in range(indptr[x], indptr[x + 1]):
                    c = cond[adj_edge[k]]
                    num += c * u[adj_vertex[k]]
                    den += c
                t = num / den
                if t < lo:
                    t = lo
                elif t > hi:
                    t = hi
            elif lo == hi:
                t = lo
            else:
                t = _coordinate_root(u, indptr, adj_vertex, adj_edge, cond, x, p,
                                     lo, hi, bisect_steps, bisect_width)
            d = abs(t - u[x])
            if d > max_update:
                max_update = d
            u[x] = t
        residual = _free_residual(u, indptr, adj_vertex, adj_edge, cond, free, p)
        energy[sweep] = _total_energy(u, edges_a, edges_b, edges_c, p)
        sweeps = sweep + 1
        if max_update < tol_update and residual < tol_residual:
            converged = True
            break
        if p != 2.0 and max_update < tol_update:
            if residual < 0.99 * best_residual:
                stagnant = 0
            else:
                stagnant += 1
                if stagnant >= 500:
                    break
        else:
            stagnant = 0
        if residual < best_residual:
            best_residual = residual
    return sweeps, max_update, residual, converged, energy[:sweeps]
