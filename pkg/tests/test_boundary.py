from __future__ import annotations

import numpy as np
import pytest

from ppotential import (GraphValidationError, NonCauchyError, SolveError, SolverOptions,
                     UnstableEndsError, boundary_cardinality_probe, dirichlet_at_infinity,
                     ends, exhaustion, exhaustion_solve, generate, get_family,
                     harmonic_decompose)

TIGHT = SolverOptions(tol_update=1e-13, tol_residual=1e-10)


def subtree_indicator(n: int, root_child: int = 1) -> np.ndarray:
    """Indicator of the binary subtree hanging below `root_child`."""
    f = np.zeros(n)
    stack = [root_child]
    while stack:
        v = stack.pop()
        if v >= n:
            continue
        f[v] = 1.0
        stack.extend((2 * v + 1, 2 * v + 2))
    return f


class TestExhaustionSolve:
    def test_vanishing_boundary_data_on_ray(self):
        # Far data beyond every level is zero except the very last vertex,
        # so each level solve is identically zero inside: the limit ignores a
        # boundary value the ray cannot hold on to.
        g = generate("halfline", 8)
        data = np.zeros(g.n)
        data[8] = 1.0
        ex = exhaustion(g, 0, range(3, 7), warn=False)
        res = exhaustion_solve(g, data, ex, 2.0, TIGHT)
        assert res.cauchy
        assert np.max(np.abs(res.limit[:8])) < 1e-12
        assert res.energy_bounded
        assert res.selected == tuple(range(len(ex.radii)))

    def test_solutions_pin_data_outside_levels(self):
        g = generate("tree", 2, 4)
        f = subtree_indicator(g.n)
        ex = exhaustion(g, 0, [1, 2, 3], warn=False)
        res = exhaustion_solve(g, f, ex, 2.0, TIGHT, cauchy_tol=0.05)
        for k, h in enumerate(res.solutions):
            outside = np.setdiff1d(np.arange(g.n), ex.levels[k])
            assert np.array_equal(h[outside], f[outside])

    def test_complete_exhaustion_rejected(self):
        g = generate("path", 4)
        ex = exhaustion(g, 0, [10], warn=False)
        with pytest.raises(SolveError, match="pins nothing"):
            exhaustion_solve(g, np.zeros(g.n), ex, 2.0)


class TestHarmonicDecomposition:
    @pytest.mark.parametrize("p", (1.5, 2.0, 3.0))
    def test_split_is_exact_and_harmonic(self, p):
        g = generate("tree", 2, 5)
        f = subtree_indicator(g.n)
        ex = exhaustion(g, 0, range(1, 5), warn=False)
        opts = TIGHT if p >= 2 else SolverOptions(tol_update=1e-10, tol_residual=1e-7)
        dec = harmonic_decompose(g, f, ex, p, opts, cauchy_tol=0.05)
        assert np.allclose(dec.f, dec.h + dec.g0, atol=1e-15)
        assert dec.residual_interior <= 1e-7
        assert dec.exhaustion_result.cauchy
        assert dec.g0_norm > 0.1
        assert dec.outer_gap_max == pytest.approx(max(dec.outer_gaps.values()))
        assert dec.outer_gap_max < 0.05

    def test_non_cauchy_raises_with_partial_result(self):
        g = generate("tree", 2, 4)
        f = subtree_indicator(g.n)
        ex = exhaustion(g, 0, range(1, 4), warn=False)
        with pytest.raises(NonCauchyError) as err:
            harmonic_decompose(g, f, ex, 2.0, TIGHT, cauchy_tol=1e-9)
        partial = err.value.result
        assert not partial.cauchy
        assert len(partial.solutions) == 3


class TestDirichletAtInfinity:
    def make_tree_setup(self, depth=5):
        g = generate("tree", 2, depth)
        profile = ends(g, 0, (1, 2), groups={"left": 1, "right": 2})
        ex = exhaustion(g, 0, range(3, depth), warn=False)
        return g, profile, ex

    @pytest.mark.parametrize("p", (1.5, 2.0, 3.0))
    def test_symmetric_data_puts_root_at_midpoint(self, p):
        g, profile, ex = self.make_tree_setup()
        opts = TIGHT if p >= 2 else SolverOptions(tol_update=1e-10, tol_residual=1e-7)
        res = dirichlet_at_infinity(g, profile, {"left": 0.0, "right": 1.0},
                                    ex, p, opts, cauchy_tol=0.05)
        assert res.h[0] == pytest.approx(0.5, abs=1e-9)
        assert np.all(res.h >= -1e-12) and np.all(res.h <= 1 + 1e-12)
        for lab in ("left", "right"):
            trace = res.traces[lab]
            assert trace.vertices.size >= 2
            assert trace.deviations[-1] <= 0.05
            # Ray runs outward from the basepoint.
            assert np.all(np.diff(trace.distances) > 0)

    def test_label_mismatch_rejected(self):
        g, profile, ex = self.make_tree_setup()
        with pytest.raises(GraphValidationError, match="labels"):
            dirichlet_at_infinity(g, profile, {"left": 0.0}, ex, 2.0)
        with pytest.raises(GraphValidationError, match="deeper"):
            shallow = exhaustion(g, 0, [1, 2], warn=False)
            dirichlet_at_infinity(g, profile, {"left": 0.0, "right": 1.0},
                                  shallow, 2.0)

    def test_unstable_ends_rejected(self):
        g = generate("tree", 2, 3)
        profile = ends(g, 0, (1, 3))
        assert not profile.stabilized
        ex = exhaustion(g, 0, [1, 2], warn=False)
        data = {lab: 0.0 for lab in profile.labels}
        with pytest.raises(UnstableEndsError) as err:
            dirichlet_at_infinity(g, profile, data, ex, 2.0)
        assert err.value.counts == profile.counts


class TestBoundaryProbe:
    def test_parabolic_family_has_empty_probe(self):
        res = boundary_cardinality_probe(get_family("halfline"), 2.0, (3, 6, 12, 24),
                                         opts=TIGHT, eps_par=0.1)
        assert res.kind == "empty" and res.k == 0
        assert res.witnesses == {} and res.size is None
        assert res.parabolicity.classification == "parabolic"

    def test_tree_probe_distinguishes_both_ends(self):
        res = boundary_cardinality_probe(get_family("tree"), 2.0, (3, 4, 5, 6),
                                         opts=TIGHT, cauchy_tol=0.05, delta=0.05)
        assert res.kind == "rich" and res.k == 2
        assert res.size == 6
        for lab, wit in res.witnesses.items():
            assert wit.nonconstant
            assert wit.spread > 0.5
            assert wit.h.max() <= 1 + 1e-12 and wit.h.min() >= -1e-12
