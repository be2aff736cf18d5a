"""Behavior at infinity: exhaustion limits, energy decomposition, end probes.

Everything here approximates statements about infinite graphs by solving on
finite windows: solutions along an exhaustion, their limit when the sequence
is Cauchy on every witness compact, the split of a finite-energy function
into a harmonic part plus an energy-null part, and a probe for how many
boundary directions the solver can actually distinguish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import _check_function, n1p_norm, p_energy
from .capacity import ParabolicityResult, parabolicity
from .dirichlet import SolveError, SolverOptions, SolveReport, residual, solve_required
from .families import Family
from .graph import (GraphValidationError, EndProfile, Exhaustion, WeightedGraph,
                    ends, exhaustion)

_DIST_TOL = 1e-12


class NonCauchyError(SolveError):
    """Exhaustion solutions failed the Cauchy check; carries the partial result."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class UnstableEndsError(GraphValidationError):
    """End detection had not stabilized; carries the count sequence."""

    def __init__(self, message, counts):
        super().__init__(message)
        self.counts = counts


@dataclass(frozen=True)
class ExhaustionSolveResult:
    """Solutions h_k along an exhaustion and their limit candidate.

    Each h_k equals the data exactly outside level k. `deviations[j]` lists
    sup |h_{k+1} - h_k| over witness level j for consecutive k >= j; `cauchy`
    says every witness sequence is nonincreasing over its trailing window
    (three terms) with last entry below `cauchy_tol`; earlier swings are
    allowed while the levels grow into the data. When the tail fails,
    `selected` is the greedy
    subsequence (halving deviation targets, witness diagonal) actually used;
    otherwise it lists every level. `limit` is the last selected solution.
    """

    levels: Exhaustion
    solutions: tuple[np.ndarray, ...]
    reports: tuple[SolveReport, ...]
    deviations: dict[int, np.ndarray]
    cauchy: bool
    cauchy_tol: float
    selected: tuple[int, ...]
    limit: np.ndarray
    energies: np.ndarray
    energy_bounded: bool


def exhaustion_solve(g: WeightedGraph, data, ex: Exhaustion, p: float,
                     opts: SolverOptions | None = None,
                     cauchy_tol: float = 1e-2) -> ExhaustionSolveResult:
    """Solve the pinned problem on every exhaustion level and track a limit.

    On level k the free set is the ball and the pinned values are `data`
    everywhere outside; solves are warm-started from the previous level.
    The witness compacts are the levels themselves.

    Raises
    ------
    SolveError
        A level solve failed to converge, or the exhaustion's last level
        leaves nothing pinned.
    """
    data = _check_function(g, data)
    if ex.levels[-1].size >= g.n:
        raise SolveError("last exhaustion level pins nothing; shrink the schedule")
    opts = opts or SolverOptions()

    solutions = []
    reports = []
    warm = None
    for level in ex.levels:
        level_opts = opts if warm is None else opts.with_initial(warm)
        h, rep = solve_required(g, level, data, p, level_opts)
        solutions.append(h)
        reports.append(rep)
        warm = h

    K = len(solutions)
    deviations: dict[int, np.ndarray] = {}
    for j in range(K):
        witness = ex.levels[j]
        devs = [float(np.max(np.abs(solutions[k + 1][witness] - solutions[k][witness])))
                for k in range(j, K - 1)]
        deviations[j] = np.array(devs)

    cauchy = True
    # Early levels may swing while the window grows into the data's support;
    # only the tail decides. Increases far below the tolerance are noise.
    rise_slack = 1e-12 + 1e-6 * cauchy_tol
    for j in range(K):
        devs = deviations[j]
        if devs.size == 0:
            continue
        tail = devs[-min(3, devs.size):]
        if np.any(np.diff(tail) > rise_slack):
            cauchy = False
            break
        if devs[-1] >= cauchy_tol:
            cauchy = False
            break

    if cauchy or K == 1:
        selected = tuple(range(K))
    else:
        picked = [0]
        target = cauchy_tol
        for k in range(1, K):
            witness_depth = min(len(picked) - 1, K - 1)
            witness = ex.levels[witness_depth]
            dev = float(np.max(np.abs(solutions[k][witness] - solutions[picked[-1]][witness])))
            if dev <= target:
                picked.append(k)
                target *= 0.5
        selected = tuple(picked)

    energies = np.array([p_energy(g, h, p) for h in solutions])
    data_energy = p_energy(g, data, p)
    energy_bounded = bool(np.all(energies <= data_energy * (1.0 + 1e-12) + 1e-15))

    return ExhaustionSolveResult(
        levels=ex,
        solutions=tuple(solutions),
        reports=tuple(reports),
        deviations=deviations,
        cauchy=bool(cauchy),
        cauchy_tol=float(cauchy_tol),
        selected=selected,
        limit=solutions[selected[-1]],
        energies=energies,
        energy_bounded=energy_bounded,
    )


# -- energy decomposition -----------------------------------------------------


@dataclass(frozen=True)
class HarmonicDecomposition:
    """Split f = g0 + h: h the exhaustion limit, g0 = f - h vanishing far out.

    `residual_interior` is the p-Laplacian sup norm of h over the deepest
    selected level; `outer_gaps` maps each far-direction label to
    max |g0| on the deepest free shell in that direction.
    """

    f: np.ndarray
    h: np.ndarray
    g0: np.ndarray
    exhaustion_result: ExhaustionSolveResult
    residual_interior: float
    outer_gaps: dict[str, float]
    outer_gap_max: float
    g0_norm: float
    p: float


def harmonic_decompose(g: WeightedGraph, data, ex: Exhaustion, p: float,
                     opts: SolverOptions | None = None,
                     cauchy_tol: float = 1e-2) -> HarmonicDecomposition:
    """Decompose `data` into its harmonic limit plus an energy-null remainder.

    Requires the exhaustion solutions to be Cauchy on every witness level;
    otherwise raises `NonCauchyError` carrying the partial result.
    """
    result = exhaustion_solve(g, data, ex, p, opts, cauchy_tol)
    if not result.cauchy:
        raise NonCauchyError(
            "exhaustion solutions are not Cauchy on the witness levels "
            "(last deviations: %s)" % {j: d[-1] for j, d in result.deviations.items() if d.size},
            result)
    data = _check_function(g, data)
    h = result.limit
    g0 = data - h

    last_level = ex.levels[result.selected[-1]]
    residual_interior = residual(g, h, p, last_level)

    dist = g.distances(ex.basepoint)
    shell_dist = float(np.max(dist[last_level]))
    shell = last_level[dist[last_level] >= shell_dist - _DIST_TOL]
    far_mask = dist >= shell_dist - _DIST_TOL
    outer_gaps = {}
    remaining = far_mask.copy()
    comp_id = 0
    for x in np.flatnonzero(far_mask):
        if not remaining[x]:
            continue
        comp = g._component_of(int(x), far_mask)
        remaining[comp] = False
        members = np.intersect1d(shell, comp)
        if members.size:
            outer_gaps["d%d" % comp_id] = float(np.max(np.abs(g0[members])))
            comp_id += 1

    return HarmonicDecomposition(
        f=data,
        h=h,
        g0=g0,
        exhaustion_result=result,
        residual_interior=residual_interior,
        outer_gaps=outer_gaps,
        outer_gap_max=max(outer_gaps.values()) if outer_gaps else 0.0,
        g0_norm=n1p_norm(g, g0, p),
        p=float(p),
    )


# -- solving with boundary data at infinity -----------------------------------


@dataclass(frozen=True)
class EndTrace:
    """Deviation from the end's value along a canonical geodesic ray."""

    label: str
    vertices: np.ndarray
    distances: np.ndarray
    deviations: np.ndarray


@dataclass(frozen=True)
class AtInfinityResult:
    """Solution with prescribed values per end, plus per-end ray traces."""

    h: np.ndarray
    end_data: dict[str, float]
    profile: EndProfile
    exhaustion_result: ExhaustionSolveResult
    traces: dict[str, EndTrace]


def _canonical_ray(g: WeightedGraph, basepoint: int, end_vertices: np.ndarray) -> np.ndarray:
    """Lexicographically least geodesic from the basepoint into the end.

    Targets the deepest end vertex (ties broken by least index) and walks
    greedily, always taking the least-index neighbor that stays on a shortest
    path to the target.
    """
    d_base = g.distances(basepoint)
    depth = d_base[end_vertices]
    deepest = depth.max()
    cands = end_vertices[depth >= deepest - _DIST_TOL]
    target = int(np.min(cands))
    d_target = g.distances(target)
    total = d_base[target]

    ray = [int(basepoint)]
    x = int(basepoint)
    while x != target:
        lo, hi = g.indptr[x], g.indptr[x + 1]
        nxt = -1
        for s in range(lo, hi):
            y = int(g.adj_vertex[s])
            step = g.length[g.adj_edge[s]]
            on_geodesic = abs(d_base[x] + step + d_target[y] - total) <= 1e-9
            if on_geodesic and d_base[y] > d_base[x] + step - 1e-9:
                if nxt < 0 or y < nxt:
                    nxt = y
        if nxt < 0:
            break
        ray.append(nxt)
        x = nxt
    return np.array(ray, dtype=np.int64)


def dirichlet_at_infinity(g: WeightedGraph, profile: EndProfile,
                          end_data: dict[str, float], ex: Exhaustion, p: float,
                          opts: SolverOptions | None = None,
                          cauchy_tol: float = 1e-2) -> AtInfinityResult:
    """Solve with one prescribed value per end.

    Builds the boundary function (end values on the far region, a single
    interpolation solve on the probe ball), then runs `exhaustion_solve` and
    traces |h - value| along a canonical ray into each end.

    Raises
    ------
    UnstableEndsError
        The profile's end count had not stabilized.
    GraphValidationError
        Data labels do not match the profile, or the exhaustion is not
        deeper than the last probe radius.
    """
    if not profile.stabilized:
        raise UnstableEndsError(
            "end count not stabilized over probe radii (counts %s)" % (profile.counts,),
            profile.counts)
    given = set(end_data)
    want = set(profile.labels)
    if given != want:
        raise GraphValidationError(
            "end data labels %s do not match profile labels %s"
            % (sorted(given), sorted(want)))
    if max(ex.radii) <= max(profile.probe_radii):
        raise GraphValidationError(
            "exhaustion (max radius %r) must go deeper than the end probes (%r)"
            % (max(ex.radii), max(profile.probe_radii)))

    F = np.zeros(g.n)
    far_mask = profile.assignment >= 0
    for j, lab in enumerate(profile.labels):
        F[profile.assignment == j] = float(end_data[lab])
    ball = np.flatnonzero(~far_mask)
    if ball.size:
        F, _ = solve_required(g, ball, F, p, opts)

    result = exhaustion_solve(g, F, ex, p, opts, cauchy_tol)
    h = result.limit

    free_mask = np.zeros(g.n, dtype=bool)
    free_mask[ex.levels[result.selected[-1]]] = True
    d_base = g.distances(ex.basepoint)
    traces = {}
    for lab in profile.labels:
        ray = _canonical_ray(g, ex.basepoint, profile.ends[lab])
        keep = ray[free_mask[ray]]
        traces[lab] = EndTrace(
            label=lab,
            vertices=keep,
            distances=d_base[keep],
            deviations=np.abs(h[keep] - float(end_data[lab])),
        )

    return AtInfinityResult(
        h=h,
        end_data={k: float(v) for k, v in end_data.items()},
        profile=profile,
        exhaustion_result=result,
        traces=traces,
    )


# -- boundary cardinality probe ------------------------------------------------


@dataclass(frozen=True)
class WitnessRecord:
    """One end-indicator solve: its spread decides nonconstancy."""

    label: str
    h: np.ndarray
    spread: float
    nonconstant: bool


@dataclass(frozen=True)
class ProbeResult:
    """How many boundary directions the solver distinguishes for a family.

    kind is "empty" (parabolic: no boundary seen), "trivial" (solves constant,
    one point at most) or "rich" (k ends carry distinguishable data).
    """

    kind: str
    k: int
    parabolicity: ParabolicityResult
    witnesses: dict[str, WitnessRecord]
    size: int | None
    nonconstant_tol: float


def boundary_cardinality_probe(family: Family, p: float, sizes,
                               nonconstant_tol: float = 1e-6,
                               opts: SolverOptions | None = None,
                               cauchy_tol: float = 1e-2,
                               **parabolicity_kwargs) -> ProbeResult:
    """Probe the boundary at infinity via parabolicity plus indicator solves.

    A parabolic family has an empty probe. Otherwise the largest truncation
    gets one solve per end group with indicator data; an end whose witness has
    spread above ``10 * nonconstant_tol`` is distinguished. All witnesses
    constant means the probe is trivial.
    """
    classification = parabolicity(family, sizes, p, opts=opts, **parabolicity_kwargs)
    if classification.classification == "parabolic":
        return ProbeResult(
            kind="empty", k=0, parabolicity=classification,
            witnesses={}, size=None, nonconstant_tol=float(nonconstant_tol))

    size = int(classification.sizes[-1])
    tr = family.truncation(size)
    gg = tr.graph
    profile = ends(gg, tr.basepoint, tr.probe_radii, groups=tr.end_seeds)
    ex = exhaustion(gg, tr.basepoint, tr.exhaustion_radii, warn=False)

    witnesses = {}
    k = 0
    for lab in profile.labels:
        data = {other: (1.0 if other == lab else 0.0) for other in profile.labels}
        res = dirichlet_at_infinity(gg, profile, data, ex, p, opts, cauchy_tol)
        spread = float(np.max(res.h) - np.min(res.h))
        nonconstant = spread > 10.0 * nonconstant_tol
        witnesses[lab] = WitnessRecord(label=lab, h=res.h, spread=spread,
                                       nonconstant=nonconstant)
        if nonconstant:
            k += 1

    kind = "rich" if k > 0 else "trivial"
    return ProbeResult(
        kind=kind, k=k, parabolicity=classification,
        witnesses=witnesses, size=size, nonconstant_tol=float(nonconstant_tol))
