from __future__ import annotations

import numpy as np
import pytest

from ppotential import (SolveError, SolverOptions, compare, generate, p_energy,
                     random_connected_graph, residual, solve_dirichlet, solve_required)

from .oracles import dense_quadratic_solve, generic_energy_min

P_VALUES = (1.5, 2.0, 3.0)
TIGHT = SolverOptions(tol_update=1e-13, tol_residual=1e-11)


def gates(p: float) -> SolverOptions:
    # Below p = 2 the residual decays much more slowly than the iterates
    # near flat spots, so the residual gate has to sit higher.
    if p < 2:
        return SolverOptions(tol_update=1e-8, tol_residual=1e-2)
    return SolverOptions(tol_update=1e-12, tol_residual=1e-9)


def random_instance(case: int, n: int = 14):
    rng = np.random.default_rng([23, case])
    g = random_connected_graph(rng, n, extra_edges=n // 2)
    n_pinned = int(rng.integers(2, max(3, n // 3)))
    pinned = rng.choice(n, size=n_pinned, replace=False)
    free = np.setdiff1d(np.arange(n), pinned)
    data = np.zeros(n)
    data[pinned] = rng.uniform(-1, 1, n_pinned)
    return g, free, data


@pytest.mark.parametrize("p", P_VALUES)
def test_path_midpoint_is_exact(p):
    g = generate("path", 2)
    u, report = solve_dirichlet(g, [1], np.array([0.0, 0.0, 1.0]), p, TIGHT)
    assert report.converged
    assert u[1] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("p", P_VALUES)
def test_path_solution_is_linear_ramp(p):
    # On a uniform path the energy minimizer is the linear interpolation for
    # every exponent, which pins down the solver across the p grid at once.
    g = generate("path", 6)
    data = np.zeros(g.n)
    data[-1] = 1.0
    u, report = solve_dirichlet(g, np.arange(1, g.n - 1), data, p, TIGHT)
    assert report.converged
    assert np.allclose(u, np.linspace(0, 1, g.n), atol=1e-9)


@pytest.mark.parametrize("case", range(10))
def test_quadratic_case_matches_dense_solve(case):
    g, free, data = random_instance(case)
    u, report = solve_dirichlet(g, free, data, 2.0, TIGHT)
    ref = dense_quadratic_solve(g, free, data)
    assert report.converged
    assert np.max(np.abs(u - ref)) < 1e-9


@pytest.mark.parametrize("p", (1.5, 3.0))
@pytest.mark.parametrize("case", range(5))
def test_general_exponent_matches_reference_minimizer(p, case):
    g, free, data = random_instance(case, n=10)
    opts = SolverOptions(tol_update=1e-12, tol_residual=1e-9) if p > 2 else \
        SolverOptions(tol_update=1e-8, tol_residual=1e-2)
    u, report = solve_dirichlet(g, free, data, p, opts)
    ref = generic_energy_min(g, free, data, p)
    assert report.converged
    # Near a flat minimum the energies agree far better than the iterates.
    assert p_energy(g, u, p) <= p_energy(g, ref, p) + 1e-6
    assert np.max(np.abs(u - ref)) < 2e-3


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("case", range(5))
def test_maximum_principle(p, case):
    g, free, data = random_instance(case)
    pinned = np.setdiff1d(np.arange(g.n), free)
    u, report = solve_dirichlet(g, free, data, p, gates(p))
    assert report.converged
    assert np.max(u) <= np.max(data[pinned]) + 1e-12
    assert np.min(u) >= np.min(data[pinned]) - 1e-12


@pytest.mark.parametrize("p", P_VALUES)
def test_comparison_principle(p):
    g, free, data = random_instance(31)
    pinned = np.setdiff1d(np.arange(g.n), free)
    higher = data.copy()
    higher[pinned] += 0.3
    res = compare(g, free, data, higher, p, gates(p), slack=1e-3 if p < 2 else 1e-6)
    assert res.satisfied
    assert res.max_violation <= res.threshold

    with pytest.raises(ValueError, match="data1 <= data2"):
        compare(g, free, higher, data, p, gates(p))


def test_energy_monotone_along_sweeps():
    g, free, data = random_instance(41)
    for p in P_VALUES:
        _, report = solve_dirichlet(g, free, data, p, gates(p))
        assert report.energy_nonincreasing()


def test_empty_free_set_is_identity():
    g = generate("path", 3)
    data = np.array([0.0, 0.25, 0.5, 1.0])
    u, report = solve_dirichlet(g, [], data, 2.0)
    assert report.converged and report.sweeps == 0
    assert np.array_equal(u, data)


def test_all_free_rejected():
    g = generate("path", 3)
    with pytest.raises(SolveError, match="no pinned vertices"):
        solve_dirichlet(g, np.arange(g.n), np.zeros(g.n), 2.0)


def test_warm_start_used():
    g = generate("path", 8)
    data = np.zeros(g.n)
    data[-1] = 1.0
    exact = np.linspace(0, 1, g.n)
    opts = TIGHT.with_initial(exact)
    u, report = solve_dirichlet(g, np.arange(1, g.n - 1), data, 2.0, opts)
    assert report.converged
    assert report.sweeps <= 2
    assert np.allclose(u, exact, atol=1e-12)


def test_non_convergence_reported_not_raised():
    g, free, data = random_instance(43)
    opts = SolverOptions(tol_update=1e-15, tol_residual=1e-15, max_sweeps=2)
    _, report = solve_dirichlet(g, free, data, 1.5, opts)
    assert not report.converged
    with pytest.raises(SolveError, match="did not converge"):
        solve_required(g, free, data, 1.5, opts)


def test_residual_of_solution_is_small():
    g, free, data = random_instance(47)
    gates = {1.5: SolverOptions(tol_update=1e-8, tol_residual=1e-2),
             2.0: SolverOptions(tol_update=1e-12, tol_residual=1e-9),
             3.0: SolverOptions(tol_update=1e-12, tol_residual=1e-9)}
    for p in P_VALUES:
        u, report = solve_dirichlet(g, free, data, p, gates[p])
        assert report.converged
        assert residual(g, u, p, free) <= report.tol_residual


def test_free_set_validation():
    g = generate("path", 3)
    with pytest.raises(ValueError, match="out of range"):
        solve_dirichlet(g, [99], np.zeros(g.n), 2.0)
    with pytest.raises(ValueError, match="free mask shape"):
        solve_dirichlet(g, np.zeros(2, dtype=bool), np.zeros(g.n), 2.0)
