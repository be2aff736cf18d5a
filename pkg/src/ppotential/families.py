"""Infinite-graph families probed through finite truncations.

Each family yields, per size, a finite truncation carrying the graph, the
basepoint, the outer boundary (sink), seed vertices naming the directions to
infinity, and radius schedules for end probes and exhaustions. The classifiers
in `capacity` and `boundary` consume these truncations; nothing here solves
anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphValidationError, WeightedGraph, generate


@dataclass(frozen=True)
class Truncation:
    """One finite window onto an infinite family."""

    graph: WeightedGraph
    basepoint: int
    sink: np.ndarray
    end_seeds: dict[str, int]
    probe_radii: tuple[float, ...]
    exhaustion_radii: tuple[float, ...]


@dataclass(frozen=True)
class Family:
    """A named family of truncations; `truncation(size)` builds the window."""

    name: str
    branching: int | None

    def truncation(self, size: int) -> Truncation:
        size = int(size)
        if self.name == "halfline":
            if size < 3:
                raise GraphValidationError("halfline truncation needs size >= 3")
            g = generate("halfline", size)
            return Truncation(
                graph=g, basepoint=0,
                sink=np.array([size], dtype=np.int64),
                end_seeds={"end": size},
                probe_radii=(1.0, 2.0),
                exhaustion_radii=tuple(float(r) for r in range(3, size)),
            )
        if self.name == "line":
            if size < 3:
                raise GraphValidationError("line truncation needs size >= 3")
            g = generate("path", 2 * size)
            return Truncation(
                graph=g, basepoint=size,
                sink=np.array([0, 2 * size], dtype=np.int64),
                end_seeds={"left": 0, "right": 2 * size},
                probe_radii=(1.0, 2.0),
                exhaustion_radii=tuple(float(r) for r in range(3, size)),
            )
        if self.name == "tree":
            b = self.branching
            if size < 3:
                raise GraphValidationError("tree truncation needs depth >= 3")
            g = generate("tree", b, size)
            first_leaf = (b ** size - 1) // (b - 1)
            labels = ("left", "right") if b == 2 else tuple("c%d" % j for j in range(1, b + 1))
            return Truncation(
                graph=g, basepoint=0,
                sink=np.arange(first_leaf, g.n, dtype=np.int64),
                end_seeds={lab: j + 1 for j, lab in enumerate(labels)},
                probe_radii=(1.0, 2.0),
                exhaustion_radii=tuple(float(r) for r in range(3, size)),
            )
        if self.name == "grid":
            if size < 3:
                raise GraphValidationError("grid truncation needs size >= 3")
            side = 2 * size + 1
            g = generate("grid", side, side)
            center = size * side + size
            border = [i * side + j for i in range(side) for j in range(side)
                      if i in (0, side - 1) or j in (0, side - 1)]
            return Truncation(
                graph=g, basepoint=center,
                sink=np.array(sorted(border), dtype=np.int64),
                end_seeds={"end": 0},
                probe_radii=(1.0, 2.0),
                exhaustion_radii=tuple(float(r) for r in range(3, size)),
            )
        raise GraphValidationError("unknown family %r" % self.name)


def get_family(name: str, branching: int = 2) -> Family:
    """Look up a family by name: halfline, line, tree, grid."""
    name = str(name)
    if name not in ("halfline", "line", "tree", "grid"):
        raise GraphValidationError("unknown family %r" % name)
    if name == "tree":
        if branching < 2:
            raise GraphValidationError("tree family needs branching >= 2")
        return Family(name=name, branching=int(branching))
    return Family(name=name, branching=None)
