"""Discrete first-order calculus: gradients, p-energies, norms, clamping.

Functions on a graph are plain float arrays indexed by dense vertex index;
edge fields are float arrays indexed by edge. The p-energy weighs squared
differences by conductance only; edge lengths enter the metric gradient and
nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph


def _check_function(g: WeightedGraph, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (g.n,):
        raise ValueError("function shape %s does not match %d vertices" % (u.shape, g.n))
    if not np.all(np.isfinite(u)):
        raise ValueError("function values must be finite")
    return u


def grad(g: WeightedGraph, u) -> np.ndarray:
    """Metric gradient per edge: |u(x) - u(y)| / length(e).

    Returns
    -------
    ndarray of shape (m,)
        Nonnegative; zero exactly on edges where u is constant.
    """
    u = _check_function(g, u)
    du = u[g.edges[:, 0]] - u[g.edges[:, 1]]
    return np.abs(du) / g.length


def p_energy(g: WeightedGraph, u, p: float, eps: float = 0.0) -> float:
    """p-energy sum_e c_e |u(x) - u(y)|^p, optionally smoothed.

    With ``eps > 0`` returns the regularized energy
    ``sum_e c_e (|u(x) - u(y)|^2 + eps^2)^(p/2)``, which dominates the plain
    energy and converges to it as eps -> 0.
    """
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    u = _check_function(g, u)
    du = u[g.edges[:, 0]] - u[g.edges[:, 1]]
    if eps > 0:
        return float(np.sum(g.cond * (du * du + eps * eps) ** (p / 2.0)))
    return float(np.sum(g.cond * np.abs(du) ** p))


def energy_gradient(g: WeightedGraph, u, p: float, eps: float = 0.0) -> np.ndarray:
    """Vertex-wise gradient of the (regularized) p-energy.

    Component at x: ``p * sum_{y ~ x} c_xy phi(u(x) - u(y))`` with
    ``phi(t) = (t^2 + eps^2)^((p-2)/2) t``. At ``eps = 0`` and p < 2 the
    weight is taken as sign(t) |t|^(p-1), so edges with equal endpoint values
    contribute zero rather than NaN.
    """
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    u = _check_function(g, u)
    a, b = g.edges[:, 0], g.edges[:, 1]
    t = u[a] - u[b]
    if eps > 0:
        w = g.cond * (t * t + eps * eps) ** ((p - 2.0) / 2.0) * t
    else:
        w = g.cond * np.sign(t) * np.abs(t) ** (p - 1.0)
    out = np.zeros(g.n)
    np.add.at(out, a, p * w)
    np.add.at(out, b, -p * w)
    return out


def n1p_norm(g: WeightedGraph, u, p: float) -> float:
    """Sobolev norm (sum_x mu_x |u(x)|^p + p-energy)^(1/p)."""
    if p <= 1:
        raise ValueError("p must be > 1, got %r" % p)
    u = _check_function(g, u)
    return float((np.sum(g.mu * np.abs(u) ** p) + p_energy(g, u, p)) ** (1.0 / p))


def product_upper_gradient(g: WeightedGraph, u, v) -> np.ndarray:
    """Edge field dominating the gradient of a product.

    Returns ``||u||_inf * grad(v) + ||v||_inf * grad(u)``, which is >=
    grad(u * v) edgewise.
    """
    u = _check_function(g, u)
    v = _check_function(g, v)
    return float(np.max(np.abs(u))) * grad(g, v) + float(np.max(np.abs(v))) * grad(g, u)


def clamp(u, lo: float, hi: float) -> np.ndarray:
    """Clip values to [lo, hi]; never increases any edge difference."""
    if lo > hi:
        raise ValueError("clamp needs lo <= hi, got [%r, %r]" % (lo, hi))
    return np.clip(np.asarray(u, dtype=np.float64), lo, hi)


@dataclass(frozen=True)
class ConvergenceReport:
    """Convergence diagnostics for a sequence against a claimed limit.

    sup_deviations maps each compact's name to the per-term sup deviation on
    it; diff_energies holds the p-energy of (term - limit); sup_norms the
    global sup norm per term. `uniformly_bounded` is taken from an explicit
    bound when given, otherwise inferred from the tail of sup_norms.
    """

    sup_deviations: dict[str, np.ndarray]
    diff_energies: np.ndarray
    sup_norms: np.ndarray
    uniformly_bounded: bool
    bound: float | None
    converges: bool
    tol: float


def bdp_convergence(g: WeightedGraph, sequence, limit, compacts, p: float,
                    bound: float | None = None, tol: float = 1e-8) -> ConvergenceReport:
    """Check a sequence for bounded p-energy convergence to `limit`.

    Parameters
    ----------
    g : WeightedGraph
    sequence : iterable of array_like
        Candidate approximants, one function per term.
    limit : array_like
        Claimed limit function.
    compacts : dict[str, array_like] or sequence of array_like
        Vertex sets on which locally uniform convergence is measured; a bare
        sequence gets names "K0", "K1", ...
    p : float
    bound : float, optional
        Explicit uniform sup bound for the sequence. When omitted the report
        infers boundedness from the tail of the sup norms (not strictly
        increasing over the last min(3, len) terms).
    tol : float
        Threshold on the final sup deviation and energy for `converges`.
    """
    limit = _check_function(g, limit)
    seq = [_check_function(g, term) for term in sequence]
    if not seq:
        raise ValueError("bdp_convergence needs at least one term")
    if isinstance(compacts, dict):
        named = {str(k): np.asarray(v, dtype=np.int64) for k, v in compacts.items()}
    else:
        named = {"K%d" % i: np.asarray(v, dtype=np.int64) for i, v in enumerate(compacts)}
    if not named:
        raise ValueError("bdp_convergence needs at least one compact")
    for name, idx in named.items():
        if idx.size == 0:
            raise ValueError("compact %r is empty" % name)
        if idx.min() < 0 or idx.max() >= g.n:
            raise ValueError("compact %r has vertices out of range" % name)

    sup_devs = {
        name: np.array([float(np.max(np.abs(t[idx] - limit[idx]))) for t in seq])
        for name, idx in named.items()
    }
    diff_energies = np.array([p_energy(g, t - limit, p) for t in seq])
    sup_norms = np.array([float(np.max(np.abs(t))) for t in seq])

    if bound is not None:
        uniformly_bounded = bool(np.all(sup_norms <= bound + 1e-12))
    else:
        k = min(3, len(seq))
        tail = sup_norms[-k:]
        uniformly_bounded = not bool(np.all(np.diff(tail) > 0)) if k > 1 else True

    converges = bool(
        all(dev[-1] <= tol for dev in sup_devs.values()) and diff_energies[-1] <= tol
    ) and uniformly_bounded

    return ConvergenceReport(
        sup_deviations=sup_devs,
        diff_energies=diff_energies,
        sup_norms=sup_norms,
        uniformly_bounded=uniformly_bounded,
        bound=bound,
        converges=converges,
        tol=tol,
    )
