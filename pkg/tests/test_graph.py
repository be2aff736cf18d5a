from __future__ import annotations

import json

import numpy as np
import pytest

from ppotential import (ExhaustionCoverageWarning, GraphValidationError, WeightedGraph,
                     build_graph, ends, exhaustion, generate, load_graph, metric_ball,
                     random_connected_graph)

from .oracles import floyd_warshall


def triangle_description():
    return {
        "vertices": [{"id": 0}, {"id": 1}, {"id": 2, "measure": 3.0}],
        "edges": [
            {"u": 0, "v": 1},
            {"u": 1, "v": 2, "conductance": 2.0},
            {"u": 2, "v": 0, "length": 0.5},
        ],
    }


class TestConstruction:
    def test_defaults_applied(self):
        g = build_graph(triangle_description())
        assert g.n == 3 and g.m == 3
        assert g.mu.tolist() == [1.0, 1.0, 3.0]
        assert g.cond.tolist() == [1.0, 2.0, 1.0]
        assert g.length.tolist() == [1.0, 1.0, 0.5]

    def test_non_contiguous_ids(self):
        g = build_graph({
            "vertices": [{"id": 10}, {"id": 30}, {"id": 20}],
            "edges": [{"u": 10, "v": 30}, {"u": 30, "v": 20}],
        })
        assert g.vertex_index(30) == 1
        assert g.ids.tolist() == [10, 30, 20]
        with pytest.raises(GraphValidationError, match="unknown vertex id"):
            g.vertex_index(99)

    def test_json_round_trip(self, tmp_path):
        g = build_graph(triangle_description())
        clone = build_graph(g.to_json_dict())
        assert clone.ids.tolist() == g.ids.tolist()
        assert clone.mu.tolist() == g.mu.tolist()
        assert clone.edges.tolist() == g.edges.tolist()
        assert clone.cond.tolist() == g.cond.tolist()
        assert clone.length.tolist() == g.length.tolist()

        path = tmp_path / "g.json"
        g.save(path)
        again = load_graph(path)
        assert again.to_json_dict() == g.to_json_dict()

    def test_arrays_frozen(self):
        g = generate("path", 3)
        with pytest.raises(ValueError):
            g.cond[0] = 5.0

    @pytest.mark.parametrize("mutate,message", [
        (lambda d: d.pop("edges"), r"\$\.edges: missing"),
        (lambda d: d.update(vertices=3), r"\$\.vertices: expected a list"),
        (lambda d: d["vertices"].append({"measure": 1.0}), r"vertices\[3\]\.id: missing"),
        (lambda d: d["vertices"].append({"id": 0}), r"vertices\[3\]\.id: duplicate"),
        (lambda d: d["edges"].append({"u": 0, "v": 9}), r"edges\[3\]\.v: unknown vertex id 9"),
        (lambda d: d["edges"].append({"u": 0, "v": 1, "conductance": "x"}),
         r"edges\[3\]\.conductance"),
    ])
    def test_field_path_messages(self, mutate, message):
        desc = triangle_description()
        mutate(desc)
        with pytest.raises(GraphValidationError, match=message):
            build_graph(desc)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"vertices\": [")
        with pytest.raises(GraphValidationError, match=r"\$: invalid JSON at line"):
            load_graph(path)

    @pytest.mark.parametrize("kwargs,message", [
        (dict(ids=[0], measures=[1.0], edge_pairs=np.empty((0, 2)), conductances=[], lengths=[]),
         "at least 2"),
        (dict(ids=[0, 0], measures=[1, 1], edge_pairs=[[0, 1]], conductances=[1], lengths=[1]),
         "duplicate vertex ids"),
        (dict(ids=[0, 1], measures=[1, -1], edge_pairs=[[0, 1]], conductances=[1], lengths=[1]),
         "measures must be finite"),
        (dict(ids=[0, 1], measures=[1, 1], edge_pairs=[[0, 0]], conductances=[1], lengths=[1]),
         "self loop"),
        (dict(ids=[0, 1], measures=[1, 1], edge_pairs=[[0, 1], [1, 0]],
              conductances=[1, 1], lengths=[1, 1]), "duplicate edge"),
        (dict(ids=[0, 1], measures=[1, 1], edge_pairs=[[0, 1]], conductances=[0], lengths=[1]),
         "conductances must be finite"),
        (dict(ids=[0, 1], measures=[1, 1], edge_pairs=[[0, 1]], conductances=[1], lengths=[-2]),
         "lengths must be finite"),
        (dict(ids=[0, 1, 2, 3], measures=[1] * 4, edge_pairs=[[0, 1], [2, 3]],
              conductances=[1, 1], lengths=[1, 1]), "not connected"),
    ])
    def test_constructor_validation(self, kwargs, message):
        with pytest.raises(GraphValidationError, match=message):
            WeightedGraph(**kwargs)


class TestGenerators:
    def test_path_shape(self):
        g = generate("path", 4)
        assert g.n == 5 and g.m == 4
        assert g.degree(0) == 1 and g.degree(2) == 2

    def test_cycle_shape(self):
        g = generate("cycle", 5)
        assert g.n == 5 and g.m == 5
        assert all(g.degree(x) == 2 for x in range(5))

    def test_tree_shape(self):
        g = generate("tree", 2, 3)
        assert g.n == 15 and g.m == 14
        assert g.degree(0) == 2
        assert sorted(g.neighbors(1).tolist()) == [0, 3, 4]

    def test_ternary_tree_shape(self):
        g = generate("tree", 3, 2)
        assert g.n == 13 and g.m == 12
        assert g.degree(0) == 3

    def test_grid_shape(self):
        w, h = 3, 4
        g = generate("grid", w, h)
        assert g.n == w * h
        assert g.m == w * (h - 1) + h * (w - 1)

    def test_uniform_weight_overrides(self):
        g = generate("path", 2, measure=2.0, conductance=0.5, length=3.0)
        assert np.all(g.mu == 2.0) and np.all(g.cond == 0.5) and np.all(g.length == 3.0)

    def test_size_guard(self):
        with pytest.raises(GraphValidationError, match="refusing to generate"):
            generate("tree", 2, 40)

    def test_unknown_family(self):
        with pytest.raises(GraphValidationError, match="unknown family"):
            generate("torus", 3)


class TestMetric:
    @pytest.mark.parametrize("case", range(8))
    def test_distances_match_reference(self, case):
        rng = np.random.default_rng([7, case])
        g = random_connected_graph(rng, 12, extra_edges=6, length_range=(0.5, 2.0))
        ref = floyd_warshall(g)
        for src in range(0, g.n, 3):
            assert np.allclose(g.distances(src), ref[src], atol=1e-12)

    def test_metric_ball_closed(self):
        g = generate("path", 6)
        assert metric_ball(g, 3, 2.0).tolist() == [1, 2, 3, 4, 5]
        assert metric_ball(g, 0, 0.0).tolist() == [0]
        with pytest.raises(GraphValidationError, match="radius"):
            metric_ball(g, 0, -1.0)

    def test_exhaustion_nested_and_complete(self):
        g = generate("path", 8)
        ex = exhaustion(g, 4, [1, 2, 4])
        assert ex.complete
        sizes = [lvl.size for lvl in ex.levels]
        assert sizes == [3, 5, 9]
        for small, big in zip(ex.levels, ex.levels[1:]):
            assert np.all(np.isin(small, big))

    def test_exhaustion_coverage_warning(self):
        g = generate("path", 8)
        with pytest.warns(ExhaustionCoverageWarning):
            ex = exhaustion(g, 4, [1, 2])
        assert not ex.complete

    def test_exhaustion_schedule_validation(self):
        g = generate("path", 4)
        with pytest.raises(GraphValidationError, match="nonempty"):
            exhaustion(g, 0, [])
        with pytest.raises(GraphValidationError, match="strictly increasing"):
            exhaustion(g, 0, [2, 2])


class TestEnds:
    def test_line_two_ends(self):
        g = generate("path", 10)
        profile = ends(g, 5, [2, 4])
        assert profile.counts == (2, 2) and profile.stabilized
        assert len(profile.labels) == 2
        assigned = profile.assignment
        assert assigned[5] == -1
        assert assigned[0] != assigned[10] and assigned[0] >= 0

    def test_halfline_one_end(self):
        g = generate("halfline", 10)
        profile = ends(g, 0, [3, 6])
        assert profile.counts == (1, 1) and profile.stabilized

    def test_tree_grouped_ends(self):
        g = generate("tree", 2, 5)
        profile = ends(g, 0, [1, 2, 3], groups={"left": 1, "right": 2})
        assert profile.labels == ("left", "right")
        assert profile.counts[-1] == 2 and profile.stabilized
        assert 7 in profile.ends["left"] and 14 in profile.ends["right"]
        assert profile.assignment[2] == -1

    def test_group_seed_validation(self):
        g = generate("tree", 2, 5)
        with pytest.raises(GraphValidationError, match="inside the first probe radius"):
            ends(g, 0, [2, 3], groups={"left": 0, "right": 2})
        with pytest.raises(GraphValidationError, match="share a far component"):
            ends(g, 0, [2, 3], groups={"a": 3, "b": 7})
        with pytest.raises(GraphValidationError, match="no group seed"):
            ends(g, 0, [1, 2], groups={"left": 1})

    def test_probe_radii_validation(self):
        g = generate("path", 6)
        with pytest.raises(GraphValidationError, match="at least two"):
            ends(g, 3, [2])
        with pytest.raises(GraphValidationError, match="far region empty"):
            ends(g, 3, [2, 50])

    def test_finite_bulb_dropped(self):
        # A short spur off a long ray is not a direction to infinity.
        desc = {
            "vertices": [{"id": i} for i in range(8)],
            "edges": [{"u": i, "v": i + 1} for i in range(6)] + [{"u": 1, "v": 7}],
        }
        g = build_graph(desc)
        profile = ends(g, 0, [1.5, 3])
        assert profile.counts[-1] == 1


class TestRandomGraphs:
    def test_deterministic_for_seed(self):
        a = random_connected_graph(np.random.default_rng(5), 15, extra_edges=4)
        b = random_connected_graph(np.random.default_rng(5), 15, extra_edges=4)
        assert a.edges.tolist() == b.edges.tolist()
        assert np.allclose(a.cond, b.cond) and np.allclose(a.mu, b.mu)

    @pytest.mark.parametrize("case", range(5))
    def test_connected_with_chords(self, case):
        rng = np.random.default_rng([11, case])
        g = random_connected_graph(rng, 20, extra_edges=10)
        assert np.all(np.isfinite(g.distances(0)))
        assert g.m >= 19
