"""Weighted graph core: construction, generators, metric balls, exhaustions, ends.

A graph here is finite, connected and undirected. Vertices carry a strictly
positive measure, edges a strictly positive conductance and a strictly positive
length. Conductances weight energies, lengths define the shortest-path metric;
the two play no other role and are never mixed.
"""

from __future__ import annotations

import heapq
import json
import warnings
from dataclasses import dataclass

import numpy as np

# Refuse to generate graphs larger than this many vertices.
SIZE_GUARD = 2_000_000

_DIST_TOL = 1e-12


class GraphValidationError(ValueError):
    """A graph description violates a construction invariant."""


class ExhaustionCoverageWarning(UserWarning):
    """The final exhaustion level omits vertices of the (finite) graph."""


class WeightedGraph:
    """Immutable weighted graph with measures, conductances and lengths.

    Vertices are exposed as dense indices ``0..n-1``; the original ids from the
    input description are kept for round trips and CLI output. All arrays are
    frozen after construction and every operation on the graph is read-only.

    Parameters
    ----------
    ids : array_like of int
        Original vertex ids, one per vertex, all distinct.
    measures : array_like of float
        Strictly positive vertex measures, aligned with `ids`.
    edge_pairs : array_like of shape (m, 2)
        Edges as pairs of dense vertex indices. No self loops, no duplicates
        (in either orientation).
    conductances, lengths : array_like of float
        Strictly positive edge weights, aligned with `edge_pairs`.

    Raises
    ------
    GraphValidationError
        Fewer than two vertices, nonpositive or non-finite weights, duplicate
        ids or edges, self loops, endpoints out of range, or a disconnected
        vertex set.
    """

    def __init__(self, ids, measures, edge_pairs, conductances, lengths):
        ids = np.asarray(ids, dtype=np.int64)
        mu = np.asarray(measures, dtype=np.float64)
        pairs = np.asarray(edge_pairs, dtype=np.int64).reshape(-1, 2)
        cond = np.asarray(conductances, dtype=np.float64)
        length = np.asarray(lengths, dtype=np.float64)

        n = ids.shape[0]
        if n < 2:
            raise GraphValidationError("graph needs at least 2 vertices, got %d" % n)
        if len(set(ids.tolist())) != n:
            raise GraphValidationError("duplicate vertex ids")
        if mu.shape != (n,):
            raise GraphValidationError("measures shape %s does not match %d vertices" % (mu.shape, n))
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise GraphValidationError("vertex measures must be finite and > 0")

        m = pairs.shape[0]
        if cond.shape != (m,) or length.shape != (m,):
            raise GraphValidationError("edge weight arrays do not match %d edges" % m)
        if m and (pairs.min() < 0 or pairs.max() >= n):
            raise GraphValidationError("edge endpoint out of range")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            bad = int(np.flatnonzero(pairs[:, 0] == pairs[:, 1])[0])
            raise GraphValidationError("self loop at edge %d" % bad)
        if not np.all(np.isfinite(cond)) or np.any(cond <= 0):
            raise GraphValidationError("edge conductances must be finite and > 0")
        if not np.all(np.isfinite(length)) or np.any(length <= 0):
            raise GraphValidationError("edge lengths must be finite and > 0")

        canon = {}
        for k in range(m):
            a, b = int(pairs[k, 0]), int(pairs[k, 1])
            key = (a, b) if a < b else (b, a)
            if key in canon:
                raise GraphValidationError("duplicate edge between vertices %d and %d" % key)
            canon[key] = k

        self.n = n
        self.m = m
        self.ids = ids
        self.mu = mu
        self.edges = pairs
        self.cond = cond
        self.length = length
        self._edge_of_pair = canon
        self._id_index = {int(v): i for i, v in enumerate(ids)}

        # CSR adjacency: neighbor vertex and incident edge per slot.
        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, pairs[:, 0], 1)
        np.add.at(deg, pairs[:, 1], 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        adj_vertex = np.empty(indptr[-1], dtype=np.int64)
        adj_edge = np.empty(indptr[-1], dtype=np.int64)
        cursor = indptr[:-1].copy()
        for k in range(m):
            a, b = pairs[k]
            adj_vertex[cursor[a]] = b
            adj_edge[cursor[a]] = k
            cursor[a] += 1
            adj_vertex[cursor[b]] = a
            adj_edge[cursor[b]] = k
            cursor[b] += 1
        # Sort each adjacency slice so traversal order is reproducible.
        for x in range(n):
            lo, hi = indptr[x], indptr[x + 1]
            order = np.argsort(adj_vertex[lo:hi], kind="stable")
            adj_vertex[lo:hi] = adj_vertex[lo:hi][order]
            adj_edge[lo:hi] = adj_edge[lo:hi][order]
        self.indptr = indptr
        self.adj_vertex = adj_vertex
        self.adj_edge = adj_edge
        # Contiguous endpoint columns for the compiled kernels.
        self.edge_a = np.ascontiguousarray(pairs[:, 0])
        self.edge_b = np.ascontiguousarray(pairs[:, 1])

        if self._component_of(0).size != n:
            raise GraphValidationError("graph is not connected")

        for arr in (self.ids, self.mu, self.edges, self.cond, self.length,
                    self.indptr, self.adj_vertex, self.adj_edge,
                    self.edge_a, self.edge_b):
            arr.setflags(write=False)

    # -- basic queries ----------------------------------------------------

    def vertex_index(self, vid: int) -> int:
        """Dense index of the vertex with original id `vid`."""
        try:
            return self._id_index[int(vid)]
        except KeyError:
            raise GraphValidationError("unknown vertex id %r" % (vid,)) from None

    def neighbors(self, x: int) -> np.ndarray:
        return self.adj_vertex[self.indptr[x]:self.indptr[x + 1]]

    def incident_edges(self, x: int) -> np.ndarray:
        return self.adj_edge[self.indptr[x]:self.indptr[x + 1]]

    def degree(self, x: int) -> int:
        return int(self.indptr[x + 1] - self.indptr[x])

    def edge_between(self, a: int, b: int) -> int | None:
        key = (a, b) if a < b else (b, a)
        return self._edge_of_pair.get(key)

    def _component_of(self, start: int, mask: np.ndarray | None = None) -> np.ndarray:
        """Vertices reachable from `start`, optionally staying inside `mask`."""
        seen = np.zeros(self.n, dtype=bool)
        if mask is not None and not mask[start]:
            return np.empty(0, dtype=np.int64)
        seen[start] = True
        stack = [start]
        while stack:
            x = stack.pop()
            for y in self.neighbors(x):
                y = int(y)
                if seen[y] or (mask is not None and not mask[y]):
                    continue
                seen[y] = True
                stack.append(y)
        return np.flatnonzero(seen)

    def distances(self, source: int) -> np.ndarray:
        """Shortest-path distances from `source` using edge lengths (Dijkstra)."""
        dist = np.full(self.n, np.inf)
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist[x] + _DIST_TOL:
                continue
            lo, hi = self.indptr[x], self.indptr[x + 1]
            for s in range(lo, hi):
                y = int(self.adj_vertex[s])
                nd = d + self.length[self.adj_edge[s]]
                if nd < dist[y] - _DIST_TOL:
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        return dist

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": [
                {"id": int(self.ids[i]), "measure": float(self.mu[i])}
                for i in range(self.n)
            ],
            "edges": [
                {
                    "u": int(self.ids[self.edges[k, 0]]),
                    "v": int(self.ids[self.edges[k, 1]]),
                    "conductance": float(self.cond[k]),
                    "length": float(self.length[k]),
                }
                for k in range(self.m)
            ],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    def __repr__(self):
        return "WeightedGraph(n=%d, m=%d)" % (self.n, self.m)


# -- construction from descriptions ----------------------------------------


def _field(obj, path, key, kind, default=None):
    """Fetch obj[key] with a field-path error message; optional default."""
    if key not in obj:
        if default is not None:
            return default
        raise GraphValidationError("%s.%s: missing" % (path, key))
    val = obj[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise GraphValidationError("%s.%s: expected number, got %r" % (path, key, val))
        return float(val)
    if isinstance(val, bool) or not isinstance(val, int):
        raise GraphValidationError("%s.%s: expected integer, got %r" % (path, key, val))
    return int(val)


def build_graph(description: dict) -> WeightedGraph:
    """Build a graph from a vertex/edge description.

    Parameters
    ----------
    description : dict
        ``{"vertices": [{"id": int, "measure": float}, ...],
        "edges": [{"u": id, "v": id, "conductance": float, "length": float}, ...]}``.
        `measure`, `conductance` and `length` default to 1 when omitted.
        Edge endpoints refer to vertex ids, not positions.

    Returns
    -------
    WeightedGraph

    Raises
    ------
    GraphValidationError
        Malformed description, with a field path in the message.
    """
    if not isinstance(description, dict):
        raise GraphValidationError("$: expected an object")
    for key in ("vertices", "edges"):
        if key not in description:
            raise GraphValidationError("$.%s: missing" % key)
        if not isinstance(description[key], list):
            raise GraphValidationError("$.%s: expected a list" % key)

    ids, mus = [], []
    for i, v in enumerate(description["vertices"]):
        path = "vertices[%d]" % i
        if not isinstance(v, dict):
            raise GraphValidationError("%s: expected an object" % path)
        ids.append(_field(v, path, "id", int))
        mus.append(_field(v, path, "measure", float, default=1.0))

    index = {}
    for i, vid in enumerate(ids):
        if vid in index:
            raise GraphValidationError("vertices[%d].id: duplicate id %d" % (i, vid))
        index[vid] = i

    pairs, conds, lens = [], [], []
    for k, e in enumerate(description["edges"]):
        path = "edges[%d]" % k
        if not isinstance(e, dict):
            raise GraphValidationError("%s: expected an object" % path)
        u = _field(e, path, "u", int)
        v = _field(e, path, "v", int)
        for name, vid in (("u", u), ("v", v)):
            if vid not in index:
                raise GraphValidationError("%s.%s: unknown vertex id %d" % (path, name, vid))
        pairs.append((index[u], index[v]))
        conds.append(_field(e, path, "conductance", float, default=1.0))
        lens.append(_field(e, path, "length", float, default=1.0))

    return WeightedGraph(ids, mus, np.array(pairs, dtype=np.int64).reshape(-1, 2), conds, lens)


def load_graph(path) -> WeightedGraph:
    """Load a graph from a JSON file (see `build_graph` for the schema)."""
    with open(path) as fh:
        try:
            description = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphValidationError("$: invalid JSON at line %d column %d: %s"
                                       % (exc.lineno, exc.colno, exc.msg)) from None
    return build_graph(description)


# -- generators -------------------------------------------------------------


def _uniform_graph(n_vertices, pairs, measure, conductance, length):
    if n_vertices > SIZE_GUARD:
        raise GraphValidationError("refusing to generate %d vertices (guard %d)"
                                   % (n_vertices, SIZE_GUARD))
    pairs = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    m = pairs.shape[0]
    return WeightedGraph(
        np.arange(n_vertices, dtype=np.int64),
        np.full(n_vertices, float(measure)),
        pairs,
        np.full(m, float(conductance)),
        np.full(m, float(length)),
    )


def generate(family: str, *params: int, measure: float = 1.0,
             conductance: float = 1.0, length: float = 1.0) -> WeightedGraph:
    """Generate a standard graph family with uniform weights.

    Families
    --------
    ``path(n)``      : n edges on vertices 0..n, endpoints 0 and n.
    ``halfline(n)``  : same shape as path(n); vertex 0 is the ray's root.
    ``cycle(n)``     : n vertices 0..n-1 in a ring, n >= 3.
    ``tree(b, d)``   : rooted b-ary tree of depth d, root 0, level order.
    ``grid(w, h)``   : w x h lattice, vertex (i, j) at index i*h + j.

    All weights default to 1 and can be overridden uniformly.
    """
    if family in ("path", "halfline"):
        (n,) = params
        if n < 1:
            raise GraphValidationError("%s(n) needs n >= 1" % family)
        pairs = [(i, i + 1) for i in range(n)]
        return _uniform_graph(n + 1, pairs, measure, conductance, length)
    if family == "cycle":
        (n,) = params
        if n < 3:
            raise GraphValidationError("cycle(n) needs n >= 3")
        pairs = [(i, (i + 1) % n) for i in range(n)]
        return _uniform_graph(n, pairs, measure, conductance, length)
    if family == "tree":
        b, depth = params
        if b < 2 or depth < 1:
            raise GraphValidationError("tree(b, d) needs b >= 2 and d >= 1")
        n_vertices = (b ** (depth + 1) - 1) // (b - 1)
        if n_vertices > SIZE_GUARD:
            raise GraphValidationError("refusing to generate %d vertices (guard %d)"
                                       % (n_vertices, SIZE_GUARD))
        pairs = [(parent, b * parent + j + 1)
                 for parent in range((n_vertices - 1) // b + (1 if (n_vertices - 1) % b else 0))
                 for j in range(b) if b * parent + j + 1 < n_vertices]
        return _uniform_graph(n_vertices, pairs, measure, conductance, length)
    if family == "grid":
        w, h = params
        if w < 1 or h < 1 or w * h < 2:
            raise GraphValidationError("grid(w, h) needs at least 2 vertices")
        pairs = []
        for i in range(w):
            for j in range(h):
                if j + 1 < h:
                    pairs.append((i * h + j, i * h + j + 1))
                if i + 1 < w:
                    pairs.append((i * h + j, (i + 1) * h + j))
        return _uniform_graph(w * h, pairs, measure, conductance, length)
    raise GraphValidationError("unknown family %r" % family)


# -- balls, exhaustions, ends ------------------------------------------------


def metric_ball(g: WeightedGraph, center: int, radius: float) -> np.ndarray:
    """Closed metric ball: sorted indices of vertices with dist <= radius."""
    if radius < 0:
        raise GraphValidationError("ball radius must be >= 0, got %r" % radius)
    dist = g.distances(center)
    return np.flatnonzero(dist <= radius + _DIST_TOL)


@dataclass(frozen=True)
class Exhaustion:
    """Nested closed balls around a basepoint.

    ``levels[i]`` holds the sorted vertex indices of the ball at ``radii[i]``.
    `complete` records whether the last level covers the whole graph.
    """

    basepoint: int
    radii: tuple[float, ...]
    levels: tuple[np.ndarray, ...]
    complete: bool

    def level_mask(self, i: int, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        mask[self.levels[i]] = True
        return mask


def exhaustion(g: WeightedGraph, basepoint: int, radii, warn: bool = True) -> Exhaustion:
    """Build the ball exhaustion of `g` around `basepoint`.

    Parameters
    ----------
    g : WeightedGraph
    basepoint : int
        Center vertex (dense index).
    radii : sequence of float
        Strictly increasing, nonempty radius schedule.
    warn : bool
        Emit `ExhaustionCoverageWarning` when the last level omits vertices.

    Returns
    -------
    Exhaustion
        Levels are nested by construction; each level contains the basepoint.
    """
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise GraphValidationError("exhaustion needs a nonempty radius schedule")
    if any(r < 0 for r in radii):
        raise GraphValidationError("exhaustion radii must be >= 0")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise GraphValidationError("exhaustion radii not strictly increasing: %r" % (radii,))
    dist = g.distances(basepoint)
    levels = tuple(np.flatnonzero(dist <= r + _DIST_TOL) for r in radii)
    complete = levels[-1].size == g.n
    if warn and not complete:
        warnings.warn(
            "final exhaustion level covers %d of %d vertices"
            % (levels[-1].size, g.n),
            ExhaustionCoverageWarning,
            stacklevel=2,
        )
    return Exhaustion(basepoint=int(basepoint), radii=radii, levels=levels, complete=complete)


@dataclass(frozen=True)
class EndProfile:
    """Directions to infinity as seen from a basepoint at finite probe radii.

    The far region at radius R is ``{dist >= R}``, the complement of the open
    ball. Ends are the connected components of the far region at the last
    probe radius that persist (components at earlier radii count only if they
    still contain far vertices at the last radius). `counts` lists the
    persistent component count per probe radius after optional grouping;
    `stabilized` means the last two counts agree.

    `assignment` maps each vertex to an end label index, -1 off the far region.
    """

    basepoint: int
    probe_radii: tuple[float, ...]
    labels: tuple[str, ...]
    ends: dict[str, np.ndarray]
    assignment: np.ndarray
    counts: tuple[int, ...]
    stabilized: bool


def _far_components(g: WeightedGraph, dist: np.ndarray, radius: float) -> list[np.ndarray]:
    """Components of {dist >= radius}, sorted by smallest member index."""
    mask = dist >= radius - _DIST_TOL
    comps = []
    remaining = mask.copy()
    for x in np.flatnonzero(mask):
        if remaining[x]:
            comp = g._component_of(int(x), mask)
            remaining[comp] = False
            comps.append(comp)
    return comps


def ends(g: WeightedGraph, basepoint: int, probe_radii,
         groups: dict[str, int] | None = None) -> EndProfile:
    """Detect ends of `g` relative to `basepoint` at increasing probe radii.

    At each probe radius R the far region {dist >= R} is split into connected
    components; components that no longer reach the deepest far region are
    dropped (they are finite bulbs, not directions to infinity). With `groups`
    given (label -> seed vertex inside the far region at the first radius),
    components at deeper radii inherit the group of the component containing
    them, and counts are per-group.

    Returns an `EndProfile`; an unstable count sequence is reported in the
    profile rather than raised.
    """
    probe_radii = tuple(float(r) for r in probe_radii)
    if len(probe_radii) < 2:
        raise GraphValidationError("ends needs at least two probe radii")
    if any(r <= 0 for r in probe_radii):
        raise GraphValidationError("probe radii must be > 0")
    if any(b <= a for a, b in zip(probe_radii, probe_radii[1:])):
        raise GraphValidationError("probe radii not strictly increasing: %r" % (probe_radii,))

    dist = g.distances(basepoint)
    last_mask = dist >= probe_radii[-1] - _DIST_TOL
    if not last_mask.any():
        raise GraphValidationError("far region empty at radius %r" % (probe_radii[-1],))

    per_radius = []
    for r in probe_radii:
        comps = [c for c in _far_components(g, dist, r) if last_mask[c].any()]
        per_radius.append(comps)

    # Group assignment by containment: a deeper component lies inside exactly
    # one component of the previous radius.
    if groups is not None:
        first = per_radius[0]
        label_of_first = {}
        for label in sorted(groups):
            seed = int(groups[label])
            if dist[seed] < probe_radii[0] - _DIST_TOL:
                raise GraphValidationError(
                    "seed %d for group %r is inside the first probe radius" % (seed, label))
            hits = [i for i, c in enumerate(first) if seed in c]
            if not hits:
                raise GraphValidationError(
                    "seed %d for group %r is not in a persistent far component" % (seed, label))
            if hits[0] in label_of_first.values():
                raise GraphValidationError(
                    "group seeds share a far component (offending group %r)" % label)
            label_of_first[label] = hits[0]
        missing = [i for i in range(len(first)) if i not in label_of_first.values()]
        if missing:
            raise GraphValidationError(
                "far component containing vertex %d has no group seed"
                % int(first[missing[0]][0]))
        comp_labels = [dict((i, lab) for lab, i in label_of_first.items())]
        for depth in range(1, len(per_radius)):
            prev_comps = per_radius[depth - 1]
            prev_labels = comp_labels[-1]
            here = {}
            for i, c in enumerate(per_radius[depth]):
                rep = int(c[0])
                parent = next(j for j, pc in enumerate(prev_comps) if rep in pc)
                here[i] = prev_labels[parent]
            comp_labels.append(here)
        counts = tuple(len(set(lab.values())) for lab in comp_labels)
        last_labels = comp_labels[-1]
        labels = tuple(sorted(groups))
    else:
        counts = tuple(len(comps) for comps in per_radius)
        last_labels = {i: "e%d" % i for i in range(len(per_radius[-1]))}
        labels = tuple(last_labels[i] for i in range(len(per_radius[-1])))

    stabilized = counts[-1] == counts[-2]

    end_sets: dict[str, list[np.ndarray]] = {lab: [] for lab in labels}
    for i, c in enumerate(per_radius[-1]):
        end_sets[last_labels[i]].append(c)
    ends_dict = {
        lab: (np.sort(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64))
        for lab, parts in end_sets.items()
    }
    assignment = np.full(g.n, -1, dtype=np.int64)
    for j, lab in enumerate(labels):
        assignment[ends_dict[lab]] = j
    assignment.setflags(write=False)

    return EndProfile(
        basepoint=int(basepoint),
        probe_radii=probe_radii,
        labels=labels,
        ends=ends_dict,
        assignment=assignment,
        counts=counts,
        stabilized=stabilized,
    )


# -- seeded random instances -------------------------------------------------


def random_connected_graph(rng: np.random.Generator, n: int, extra_edges: int = 0,
                           conductance_range=(0.5, 2.0), measure_range=(0.5, 2.0),
                           length_range=(1.0, 1.0)) -> WeightedGraph:
    """Random connected graph: attachment tree plus `extra_edges` chords.

    Deterministic for a given generator state. Used by the verification
    sweeps; weights are drawn uniformly from the given ranges.
    """
    if n < 2:
        raise GraphValidationError("random graph needs n >= 2")
    pairs = [(int(rng.integers(0, k)), k) for k in range(1, n)]
    present = {tuple(sorted(p)) for p in pairs}
    budget = int(extra_edges)
    attempts = 0
    while budget > 0 and attempts < 50 * (budget + 1):
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        attempts += 1
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in present:
            continue
        present.add(key)
        pairs.append(key)
        budget -= 1
    m = len(pairs)

    def draw(rg, size):
        lo, hi = rg
        if lo == hi:
            return np.full(size, float(lo))
        return rng.uniform(lo, hi, size)

    return WeightedGraph(
        np.arange(n, dtype=np.int64),
        draw(measure_range, n),
        np.array(pairs, dtype=np.int64),
        draw(conductance_range, m),
        draw(length_range, m),
    )
