from __future__ import annotations

import numpy as np
import pytest

from ppotential import (bdp_convergence, build_graph, clamp, energy_gradient, generate,
                     grad, n1p_norm, p_energy, product_upper_gradient,
                     random_connected_graph)

P_VALUES = (1.5, 2.0, 3.0)


def test_grad_uses_lengths():
    g = build_graph({
        "vertices": [{"id": 0}, {"id": 1}, {"id": 2}],
        "edges": [{"u": 0, "v": 1, "length": 2.0}, {"u": 1, "v": 2, "length": 0.5}],
    })
    u = np.array([0.0, 1.0, 1.0])
    assert np.allclose(grad(g, u), [0.5, 0.0])


@pytest.mark.parametrize("p", P_VALUES)
def test_p_energy_closed_form(p):
    g = generate("path", 2, conductance=3.0)
    u = np.array([0.0, 0.5, 2.0])
    expected = 3.0 * (0.5 ** p + 1.5 ** p)
    assert p_energy(g, u, p) == pytest.approx(expected, rel=1e-14)


def test_p_energy_regularization_dominates_and_converges():
    g = generate("cycle", 4)
    rng = np.random.default_rng(3)
    u = rng.normal(size=g.n)
    for p in P_VALUES:
        plain = p_energy(g, u, p)
        assert p_energy(g, u, p, eps=1e-3) >= plain
        assert p_energy(g, u, p, eps=1e-9) == pytest.approx(plain, rel=1e-8)


def test_p_range_validated():
    g = generate("path", 2)
    u = np.zeros(g.n)
    for fn in (lambda: p_energy(g, u, 1.0), lambda: energy_gradient(g, u, 0.5),
               lambda: n1p_norm(g, u, 1.0)):
        with pytest.raises(ValueError, match="p must be > 1"):
            fn()


def test_function_length_validated():
    g = generate("path", 3)
    with pytest.raises(ValueError, match="does not match"):
        p_energy(g, np.zeros(2), 2.0)
    with pytest.raises(ValueError, match="finite"):
        p_energy(g, np.full(g.n, np.nan), 2.0)


class TestEnergyGradient:
    @pytest.mark.parametrize("p", P_VALUES)
    @pytest.mark.parametrize("eps", [0.0, 1e-3])
    def test_matches_finite_differences(self, p, eps):
        rng = np.random.default_rng([13, int(p * 10)])
        g = random_connected_graph(rng, 10, extra_edges=5)
        # Integer-spaced values keep every edge difference away from zero,
        # where the p < 2 integrand loses smoothness.
        u = rng.permutation(np.arange(g.n)).astype(float) / g.n
        analytic = energy_gradient(g, u, p, eps=eps)
        h = 1e-6
        for x in range(g.n):
            bumped = u.copy()
            bumped[x] += h
            dropped = u.copy()
            dropped[x] -= h
            fd = (p_energy(g, bumped, p, eps=eps) - p_energy(g, dropped, p, eps=eps)) / (2 * h)
            assert analytic[x] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_flat_edges_contribute_zero(self):
        g = generate("path", 3)
        u = np.array([1.0, 1.0, 1.0, 2.0])
        out = energy_gradient(g, u, 1.5)
        assert np.isfinite(out).all()
        assert out[0] == 0.0

    def test_zero_at_linear_minimizer(self):
        g = generate("path", 4)
        u = np.linspace(0.0, 1.0, g.n)
        for p in P_VALUES:
            interior = energy_gradient(g, u, p)[1:-1]
            assert np.max(np.abs(interior)) < 1e-12


def test_n1p_norm_single_scale():
    g = generate("path", 2, measure=2.0)
    u = np.array([0.0, 1.0, 0.0])
    for p in P_VALUES:
        expected = (2.0 + 2.0) ** (1.0 / p)
        assert n1p_norm(g, u, p) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("case", range(10))
def test_product_upper_gradient_dominates(case):
    rng = np.random.default_rng([17, case])
    g = random_connected_graph(rng, 12, extra_edges=6, length_range=(0.5, 2.0))
    u = rng.uniform(-2, 2, g.n)
    v = rng.uniform(-2, 2, g.n)
    bound = product_upper_gradient(g, u, v)
    assert np.all(bound >= grad(g, u * v) - 1e-12)


@pytest.mark.parametrize("case", range(10))
def test_clamp_contracts_gradient(case):
    rng = np.random.default_rng([19, case])
    g = random_connected_graph(rng, 12, extra_edges=6, length_range=(0.5, 2.0))
    u = rng.uniform(-2, 2, g.n)
    lo, hi = sorted(rng.uniform(-1.5, 1.5, 2).tolist())
    assert np.all(grad(g, clamp(u, lo, hi)) <= grad(g, u) + 1e-12)


def test_clamp_rejects_bad_interval():
    with pytest.raises(ValueError, match="lo <= hi"):
        clamp(np.zeros(3), 1.0, 0.0)


class TestConvergenceReport:
    def test_converging_sequence(self):
        g = generate("path", 6)
        limit = np.linspace(0, 1, g.n)
        seq = [limit + 2.0 ** -k for k in range(1, 8)]
        rep = bdp_convergence(g, seq, limit, {"core": [2, 3, 4]}, 2.0,
                              bound=3.0, tol=1e-2)
        assert rep.converges and rep.uniformly_bounded
        assert rep.sup_deviations["core"][-1] == pytest.approx(2.0 ** -7)
        # Constant shifts carry no energy beyond float roundoff.
        assert np.max(rep.diff_energies) < 1e-30

    def test_unbounded_sequence_flagged(self):
        g = generate("path", 4)
        limit = np.zeros(g.n)
        seq = [np.full(g.n, float(k)) for k in range(1, 6)]
        rep = bdp_convergence(g, seq, limit, [[0, 1]], 2.0)
        assert not rep.uniformly_bounded
        assert not rep.converges

    def test_explicit_bound_respected(self):
        g = generate("path", 4)
        limit = np.zeros(g.n)
        seq = [limit, limit + 0.5]
        rep = bdp_convergence(g, seq, limit, [[1]], 2.0, bound=0.1)
        assert not rep.uniformly_bounded

    def test_input_validation(self):
        g = generate("path", 4)
        limit = np.zeros(g.n)
        with pytest.raises(ValueError, match="at least one term"):
            bdp_convergence(g, [], limit, [[0]], 2.0)
        with pytest.raises(ValueError, match="at least one compact"):
            bdp_convergence(g, [limit], limit, [], 2.0)
        with pytest.raises(ValueError, match="out of range"):
            bdp_convergence(g, [limit], limit, [[99]], 2.0)
        with pytest.raises(ValueError, match="empty"):
            bdp_convergence(g, [limit], limit, {"k": []}, 2.0)
