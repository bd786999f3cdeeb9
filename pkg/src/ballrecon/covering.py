"""Finite approximation of Caratheodory's Method II with closed balls.

For a finite target set and a scale ``delta`` we generate a finite list of
candidate balls of diameter at most ``delta`` (radius <= delta/2) and solve the
weighted set cover problem "cover every target point, minimise the summed
premeasure". Sweeping ``delta`` downwards approximates the Method II limit.

The discretisation is one-sided: a returned value is the cost of an actual
cover from the candidate list, so it upper-bounds the finite-candidate
optimum (equal to it when the status is ``exact``), and says nothing about
covers outside the list.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import solvers
from .measures import SignedMeasure, ball_masses
from .metric import BallSet
from .premeasures import Exact, PremeasureModel, SignedPart

COVER_SLACK = 1e-12


@dataclass(frozen=True)
class CoverStrategy:
    """Candidate generation knobs.

    ``offset_fractions`` place extra centres at distance ``r * (1 - f)`` from
    each target point along the coordinate axes; with ``near_boundary`` the
    distance ``r - r**2`` is added as well. ``directions`` replaces the
    coordinate axes (both signs are used); ``lattice=False`` with directions
    along the support keeps every centre on the support.
    """

    radius_factors: tuple = (1 / 2, 1 / 4, 1 / 8)
    lattice: bool = True
    lattice_factor: float = 1 / 4
    perturb: bool = True
    offset_fractions: tuple = (1 / 2, 1 / 10, 1 / 100, 1 / 1000)
    near_boundary: bool = True
    directions: tuple | None = None


@dataclass(frozen=True)
class SolverParams:
    exact_candidates: int = 20
    exact_targets: int = 12


@dataclass
class CoverInstance:
    target: np.ndarray
    delta: float
    candidates: BallSet
    premeasure: PremeasureModel

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float)
        if target.size == 0:
            target = np.empty((0, self.candidates.centers.shape[1]))
        self.target = np.atleast_2d(target)
        if len(self.candidates) and np.any(2 * self.candidates.radii > self.delta * (1 + 1e-12)):
            raise ValueError("candidate diameter exceeds delta")


@dataclass
class CoverResult:
    chosen: BallSet
    value: float
    covers_target: bool
    solver_status: str
    n_candidates: int = 0
    n_useful: int = 0


def _lattice(lo: np.ndarray, hi: np.ndarray, pitch: float) -> np.ndarray:
    # anchored at the origin so nested domains share lattice points
    axes = [np.arange(math.floor(a / pitch), math.ceil(b / pitch) + 1) * pitch for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def generate_cover_candidates(target, delta: float, strategy: CoverStrategy | None = None) -> BallSet:
    """Candidate balls with radius <= delta/2 that each touch at least one target point."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    strategy = strategy or CoverStrategy()
    target = np.atleast_2d(np.asarray(target, dtype=float)) if len(target) else np.empty((0, 0))
    if target.size == 0:
        return BallSet.empty(target.shape[1] if target.ndim == 2 else 0)
    dim = target.shape[1]
    radii = [delta * f for f in strategy.radius_factors]
    rmax = max(radii)

    sets = [BallSet(np.repeat(target, len(radii), axis=0), np.tile(radii, len(target)))]

    if strategy.lattice:
        grid = _lattice(target.min(axis=0) - rmax, target.max(axis=0) + rmax, delta * strategy.lattice_factor)
        near = np.linalg.norm(grid[:, None, :] - target[None, :, :], axis=2).min(axis=1) <= rmax
        grid = grid[near]
        sets.append(BallSet(np.repeat(grid, len(radii), axis=0), np.tile(radii, len(grid))))

    if strategy.perturb:
        axes = np.eye(dim) if strategy.directions is None else np.asarray(strategy.directions, dtype=float).reshape(-1, dim)
        axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
        dirs = np.vstack([axes, -axes])
        for r in radii:
            offsets = [r * (1 - f) for f in strategy.offset_fractions]
            if strategy.near_boundary and 0 < r - r * r < r:
                offsets.append(r - r * r)
            shifts = np.array([o * d for o in offsets for d in dirs])
            centers = (target[:, None, :] + shifts[None, :, :]).reshape(-1, dim)
            sets.append(BallSet(centers, np.full(len(centers), r)))

    out = sets[0]
    for s in sets[1:]:
        out = out.concat(s)
    out = out.unique()
    touches = out.covers(target, COVER_SLACK).any(axis=1)
    return out.take(np.flatnonzero(touches))


def _masks(cover: np.ndarray) -> list[int]:
    masks = []
    for row in cover:
        m = 0
        for j in np.flatnonzero(row):
            m |= 1 << int(j)
        masks.append(m)
    return masks


def min_cover_value(instance: CoverInstance, solver: SolverParams | None = None) -> CoverResult:
    """Cheapest cover of the target by candidate balls under the instance premeasure."""
    solver = solver or SolverParams()
    target, cands = instance.target, instance.candidates
    dim = target.shape[1] if target.ndim == 2 and target.size else (cands.centers.shape[1] if len(cands) else 0)
    if len(target) == 0:
        return CoverResult(BallSet.empty(dim), 0.0, True, "exact", len(cands), 0)
    if len(cands) == 0:
        return CoverResult(BallSet.empty(dim), math.nan, False, "infeasible", 0, 0)

    cover = cands.covers(target, COVER_SLACK)
    useful = np.flatnonzero(cover.any(axis=1))
    cands = cands.take(useful)
    cover = cover[useful]
    if not cover.any(axis=0).all():
        return CoverResult(BallSet.empty(dim), math.nan, False, "infeasible", len(instance.candidates), len(useful))

    costs = [float(v) for v in instance.premeasure.values(cands.centers, cands.radii)]
    masks = _masks(cover)
    n = len(target)
    if len(cands) <= solver.exact_candidates or n <= solver.exact_targets:
        pick = solvers.set_cover_exact(masks, costs, n)
        status = "exact"
    else:
        key = [(float(r), tuple(c)) for c, r in zip(cands.centers, cands.radii)]
        pick = solvers.set_cover_greedy(masks, costs, n, tiebreak=key)
        pruned = solvers.prune_redundant(masks, costs, pick, n)
        status = "improved" if len(pruned) < len(pick) else "greedy"
        pick = pruned
    pick = sorted(pick)
    chosen = cands.take(pick)
    value = math.fsum(costs[i] for i in pick)
    return CoverResult(chosen, value, True, status, len(instance.candidates), len(useful))


@dataclass
class SweepResult:
    deltas: list
    results: list
    limit: float
    monotone_violations: list = field(default_factory=list)
    note: str = ""


def caratheodory_sweep(target, premeasure: PremeasureModel, delta_schedule, strategy: CoverStrategy | None = None,
                       solver: SolverParams | None = None, threads: int = 1) -> SweepResult:
    """Min-cover values along a strictly decreasing ``delta`` schedule.

    The Method II estimates are nondecreasing as delta shrinks; decreases
    produced by the finite candidate lists are reported as violations. The
    limit is the value at the last delta.
    """
    deltas = [float(d) for d in delta_schedule]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta schedule must be strictly decreasing")
    target = np.atleast_2d(np.asarray(target, dtype=float)) if len(target) else np.empty((0, 0))

    def solve(delta):
        cands = generate_cover_candidates(target, delta, strategy)
        return min_cover_value(CoverInstance(target, delta, cands, premeasure), solver)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(solve, deltas))
    else:
        results = [solve(d) for d in deltas]
    violations = [
        (deltas[i], deltas[i + 1])
        for i in range(len(deltas) - 1)
        if results[i + 1].value < results[i].value - 1e-12
    ]
    limit = results[-1].value if results else math.nan
    return SweepResult(deltas, results, limit, violations,
                       note="finite candidate covers; values bound the discretised infimum from above")


def signed_cover_reconstruct(mu: SignedMeasure, target, delta_schedule, strategy: CoverStrategy | None = None,
                             solver: SolverParams | None = None) -> tuple[SweepResult, SweepResult]:
    """Method II with ``p+(B) = (mu(B))_+`` and ``p-(B) = (mu(B))_-``."""
    exact = Exact(mu)
    plus = caratheodory_sweep(target, SignedPart(exact, 1), delta_schedule, strategy, solver)
    minus = caratheodory_sweep(target, SignedPart(exact, -1), delta_schedule, strategy, solver)
    return plus, minus


# --- constructed covers -----------------------------------------------------


def near_boundary_chain_cover(vertices, radius: float, offset: float) -> BallSet:
    """Balls of the given radius whose centres sit at distance ``offset`` from a 2-D polyline.

    Along each segment the centres are spaced so that consecutive chords
    overlap at most pairwise, so no part of the curve lies in more than two
    balls.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.shape[1] != 2:
        raise ValueError("constructed curve covers are planar")
    if not 0 <= offset < radius:
        raise ValueError("offset must lie in [0, radius)")
    half = math.sqrt(radius * radius - offset * offset)
    centers = []
    for a, b in zip(verts[:-1], verts[1:]):
        d = b - a
        length = float(np.linalg.norm(d))
        u = d / length
        normal = np.array([-u[1], u[0]])
        k = max(1, math.ceil(length / (2 * half)))
        for i in range(k):
            s = (i + 0.5) * length / k
            centers.append(a + s * u + offset * normal)
    centers = np.array(centers)
    return BallSet(centers, np.full(len(centers), radius))


@dataclass
class ConstructedCoverCheck:
    delta: float
    offset: float
    value: float
    mass_sum: float
    bound: float
    closed_form_bound: float
    covers: bool
    max_multiplicity: int


def check_curve_cover(mu: SignedMeasure, premeasure: PremeasureModel, delta: float, samples: int = 2001) -> ConstructedCoverCheck:
    """Evaluate the near-boundary cover of ``mu``'s first chain at scale ``delta``.

    Uses offset ``delta - delta**2`` and records ``sum q``, ``sum mu(B)``,
    ``((delta - offset)/delta) * sum mu(B)`` and ``2 L (delta - offset)/delta``.
    """
    chain = mu.chains[0]
    offset = delta - delta * delta
    cover = near_boundary_chain_cover(chain.array, delta, offset)
    value = float(premeasure.values(cover.centers, cover.radii).sum())
    masses = ball_masses(mu, cover.centers, cover.radii)
    pts = chain.points_at(np.linspace(0, chain.length, samples))
    hit = cover.covers(pts, COVER_SLACK)
    ratio = (delta - offset) / delta
    return ConstructedCoverCheck(
        delta=delta,
        offset=offset,
        value=value,
        mass_sum=float(masses.sum()),
        bound=ratio * float(masses.sum()),
        closed_form_bound=2 * chain.length * abs(chain.density) * ratio,
        covers=bool(hit.any(axis=0).all()),
        max_multiplicity=int(hit.sum(axis=0).max()),
    )
