from __future__ import annotations

import numpy as np
import pytest

from ppotential import (GraphValidationError, PathCapExceeded, SolverOptions, build_graph,
                     capacity, enumerate_paths, generate, modulus, p_energy,
                     random_connected_graph)

from .oracles import binary_tree_capacity

P_VALUES = (1.5, 2.0, 3.0)
TIGHT = SolverOptions(tol_update=1e-12, tol_residual=1e-9)


def triangle():
    return generate("cycle", 3)


def chorded_square():
    return build_graph({
        "vertices": [{"id": i} for i in range(4)],
        "edges": [{"u": 0, "v": 1}, {"u": 1, "v": 2}, {"u": 2, "v": 3},
                  {"u": 3, "v": 0}, {"u": 0, "v": 2}],
    })


class TestCapacity:
    @pytest.mark.parametrize("p", P_VALUES)
    @pytest.mark.parametrize("n", (2, 3, 5, 9))
    def test_path_closed_form(self, p, n):
        g = generate("path", n)
        res = capacity(g, [0], [n], p, TIGHT)
        assert res.value == pytest.approx(n ** (1.0 - p), rel=1e-9)

    @pytest.mark.parametrize("p", P_VALUES)
    def test_two_disjoint_routes_add(self, p):
        # Two length-2 paths between the same terminals: capacities add.
        g = build_graph({
            "vertices": [{"id": i} for i in range(4)],
            "edges": [{"u": 0, "v": 1}, {"u": 1, "v": 2},
                      {"u": 0, "v": 3}, {"u": 3, "v": 2}],
        })
        res = capacity(g, [0], [2], p, TIGHT)
        assert res.value == pytest.approx(2.0 * 2.0 ** (1.0 - p), rel=1e-9)

    @pytest.mark.parametrize("p", P_VALUES)
    @pytest.mark.parametrize("depth", (2, 3, 4))
    def test_binary_tree_reduction(self, p, depth):
        g = generate("tree", 2, depth)
        first_leaf = 2 ** depth - 1
        res = capacity(g, [0], np.arange(first_leaf, g.n), p, TIGHT)
        assert res.value == pytest.approx(binary_tree_capacity(p, depth), rel=1e-9)

    def test_potential_properties(self):
        rng = np.random.default_rng(29)
        g = random_connected_graph(rng, 18, extra_edges=9)
        for p in P_VALUES:
            opts = TIGHT if p >= 2 else SolverOptions(tol_update=1e-8, tol_residual=1e-2)
            res = capacity(g, [0, 1], [16, 17], p, opts)
            assert np.all(res.potential >= -1e-12) and np.all(res.potential <= 1 + 1e-12)
            assert np.allclose(res.potential[[0, 1]], 1.0)
            assert np.allclose(res.potential[[16, 17]], 0.0)
            assert res.value == pytest.approx(p_energy(g, res.potential, p), rel=1e-12)

    def test_terminal_validation(self):
        g = generate("path", 3)
        with pytest.raises(GraphValidationError, match="overlap"):
            capacity(g, [0, 1], [1, 3], 2.0)
        with pytest.raises(GraphValidationError, match="empty"):
            capacity(g, [], [3], 2.0)
        with pytest.raises(GraphValidationError, match="out of range"):
            capacity(g, [0], [99], 2.0)


class TestPathEnumeration:
    def test_counts_on_small_graphs(self):
        tri = triangle()
        paths = enumerate_paths(tri, np.array([0]), np.array([1]))
        assert len(paths) == 2

        square = chorded_square()
        paths = enumerate_paths(square, np.array([0]), np.array([2]))
        assert len(paths) == 3

        path_graph = generate("path", 4)
        assert len(enumerate_paths(path_graph, np.array([0]), np.array([4]))) == 1

    def test_paths_are_edge_index_lists(self):
        g = generate("path", 3)
        (path,) = enumerate_paths(g, np.array([0]), np.array([3]))
        assert sorted(path.tolist()) == [0, 1, 2]

    def test_cap_refusal(self):
        g = chorded_square()
        with pytest.raises(PathCapExceeded):
            enumerate_paths(g, np.array([0]), np.array([2]), cap=2)


class TestModulus:
    @pytest.mark.parametrize("p", P_VALUES)
    def test_triangle_routes_agree(self, p):
        res = modulus(triangle(), [0], [1], p, route="both", opts=TIGHT)
        expected = 1.0 + 2.0 ** (1.0 - p)
        assert res.value == pytest.approx(expected, rel=1e-6)
        assert res.relative_gap is not None and res.relative_gap <= 1e-4
        assert res.direct_value == pytest.approx(res.dual_value, rel=1e-4)
        assert res.path_count == 2

    @pytest.mark.parametrize("p", P_VALUES)
    def test_chorded_square_routes_agree(self, p):
        res = modulus(chorded_square(), [0], [2], p, route="both", opts=TIGHT)
        assert res.value == pytest.approx(1.0 + 2.0 ** (2.0 - p), rel=1e-6)
        assert res.relative_gap <= 1e-4

    def test_direct_density_admissible(self):
        res = modulus(triangle(), [0], [1], 2.0, route="direct", opts=TIGHT)
        assert res.min_slack is not None and res.min_slack >= -1e-9
        assert res.dual_value is None and res.relative_gap is None
        assert res.route == "direct"

    def test_dual_route_reports_capacity(self):
        res = modulus(triangle(), [0], [1], 2.0, route="dual", opts=TIGHT)
        assert res.direct_value is None and res.iterations is None
        assert res.value == pytest.approx(1.5, rel=1e-9)
        # Enumeration still ran (within cap), so admissibility is certified.
        assert res.path_count == 2 and res.min_slack >= -1e-9

    def test_route_validation(self):
        with pytest.raises(ValueError, match="route"):
            modulus(triangle(), [0], [1], 2.0, route="sideways")

    @pytest.mark.parametrize("case", range(6))
    def test_random_unit_length_duality(self, case):
        rng = np.random.default_rng([37, case])
        g = random_connected_graph(rng, 7, extra_edges=3, length_range=(1.0, 1.0))
        p = P_VALUES[case % 3]
        opts = TIGHT if p >= 2 else SolverOptions(tol_update=1e-10, tol_residual=1e-4)
        res = modulus(g, [0], [g.n - 1], p, route="both", opts=opts)
        assert res.relative_gap <= 1e-4

    def test_path_cap_propagates(self):
        with pytest.raises(PathCapExceeded):
            modulus(chorded_square(), [0], [2], 2.0, route="direct", path_cap=2)
