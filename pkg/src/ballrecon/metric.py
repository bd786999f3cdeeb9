"""Metric space models, closed balls and the directional-limitation probe.

Three models are supported: Euclidean ``R^n``, a finitely truncated geodesic
star graph (half-lines glued at a hub) and a finite metric given by a
distance matrix. Points carry the identifier of the space they live in so
that mixing spaces is caught early.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .solvers import clique_bounds, max_clique_exact

WITNESS_TOL = 1e-9
EXACT_PROBE_LIMIT = 24


class DomainError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


@dataclass(frozen=True)
class Point:
    space_id: str
    coords: tuple

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class Ball:
    """Closed ball ``{y : d(y, center) <= radius}``."""

    center: Point
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"ball radius must be positive and finite, got {self.radius!r}")


class MetricSpace:
    space_id: str

    def distance(self, p: Point, q: Point) -> float:
        self.check(p)
        self.check(q)
        return self._distance(p.coords, q.coords)

    def check(self, p: Point) -> None:
        if p.space_id != self.space_id:
            raise DomainError(f"point from space {p.space_id!r} used in space {self.space_id!r}")

    def ball(self, center, radius: float) -> Ball:
        if not isinstance(center, Point):
            center = self.point(*center) if isinstance(center, (tuple, list, np.ndarray)) else self.point(center)
        self.check(center)
        return Ball(center, float(radius))

    def point(self, *coords) -> Point:  # pragma: no cover - overridden
        raise NotImplementedError

    def _distance(self, a, b) -> float:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Euclidean(MetricSpace):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("Euclidean dimension must be >= 1")

    @property
    def space_id(self) -> str:
        return f"R{self.dim}"

    def point(self, *coords) -> Point:
        if len(coords) == 1 and isinstance(coords[0], (tuple, list, np.ndarray)):
            coords = tuple(coords[0])
        c = tuple(float(v) for v in coords)
        if len(c) != self.dim:
            raise DomainError(f"expected {self.dim} coordinates, got {len(c)}")
        if not all(math.isfinite(v) for v in c):
            raise DomainError("coordinates must be finite")
        return Point(self.space_id, c)

    def _distance(self, a, b) -> float:
        return math.dist(a, b)


@dataclass(frozen=True)
class StarGraph(MetricSpace):
    """Half-lines (rays) joined at a hub, with the induced geodesic metric.

    A point is ``(ray_index, arc_length)``; the hub is ``(0, 0.0)`` and every
    ray's arc length 0 is normalised to it.
    """

    ray_count: int
    max_arc: float = math.inf

    def __post_init__(self):
        if self.ray_count < 1:
            raise DomainError("star graph needs at least one ray")

    @property
    def space_id(self) -> str:
        return f"star{self.ray_count}:{self.max_arc!r}"

    def point(self, ray, arc: float | None = None) -> Point:
        if arc is None:
            ray, arc = ray
        ray, arc = int(ray), float(arc)
        if not 0 <= ray < self.ray_count:
            raise DomainError(f"ray index {ray} outside 0..{self.ray_count - 1}")
        if not (arc >= 0 and math.isfinite(arc)) or arc > self.max_arc:
            raise DomainError(f"arc length {arc!r} outside [0, {self.max_arc}]")
        if arc == 0:
            ray = 0
        return Point(self.space_id, (ray, arc))

    @property
    def hub(self) -> Point:
        return Point(self.space_id, (0, 0.0))

    def _distance(self, a, b) -> float:
        (ra, sa), (rb, sb) = a, b
        if ra == rb:
            return abs(sa - sb)
        return sa + sb


@dataclass(frozen=True)
class FiniteMetric(MetricSpace):
    matrix: np.ndarray = field(compare=False)
    _id: str = field(init=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DomainError("distance matrix must be square and nonempty")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DomainError("distances must be finite and nonnegative")
        if np.any(np.diag(m) != 0) or not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise DomainError("distance matrix must be symmetric with zero diagonal")
        # d(i,k) <= d(i,j) + d(j,k) for all triples
        slack = m[:, None, :] - (m[:, :, None] + m[None, :, :])
        if np.max(slack) > 1e-12:
            raise DomainError("distance matrix violates the triangle inequality")
        object.__setattr__(self, "matrix", m)
        digest = hashlib.sha1(m.tobytes()).hexdigest()[:12]
        object.__setattr__(self, "_id", f"finite{m.shape[0]}:{digest}")

    @property
    def space_id(self) -> str:
        return self._id

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def point(self, node) -> Point:
        node = int(node)
        if not 0 <= node < self.size:
            raise DomainError(f"node {node} outside 0..{self.size - 1}")
        return Point(self.space_id, (node,))

    def _distance(self, a, b) -> float:
        return float(self.matrix[a[0], b[0]])


def distance(space: MetricSpace, p: Point, q: Point) -> float:
    return space.distance(p, q)


def directional_witness_set(space: MetricSpace, a: Point, c: Point, b: Point) -> list[Point]:
    """Points ``x`` with ``d(a,x) = d(a,c)`` and ``d(a,x) + d(x,b) = d(a,b)``.

    Requires ``d(a,b) >= d(a,c) > 0``. Both equalities hold to within
    ``WITNESS_TOL`` for every returned point.
    """
    dac = space.distance(a, c)
    dab = space.distance(a, b)
    if dac == 0:
        raise DomainError("d(a, c) must be positive")
    if dab < dac - WITNESS_TOL:
        raise DomainError("requires d(a, b) >= d(a, c)")

    if isinstance(space, Euclidean):
        av, bv = a.array, b.array
        x = av + (dac / dab) * (bv - av)
        return [space.point(x)]

    if isinstance(space, StarGraph):
        # geodesics in a tree are unique: walk from a towards b by d(a,c)
        (ra, sa), (rb, sb) = a.coords, b.coords
        t = min(dac, dab)
        if sa == 0 or sb == 0 or ra == rb:
            ray = rb if sa == 0 else ra
            arc = sa + t if sb > sa else sa - t
        elif t <= sa:
            ray, arc = ra, sa - t
        else:
            ray, arc = rb, t - sa
        return [space.point(ray, max(arc, 0.0))]

    if isinstance(space, FiniteMetric):
        m = space.matrix
        ia, ib = a.coords[0], b.coords[0]
        out = []
        for node in range(space.size):
            if abs(m[ia, node] - dac) <= WITNESS_TOL and abs(m[ia, node] + m[node, ib] - dab) <= WITNESS_TOL:
                out.append(space.point(node))
        return out

    raise DomainError(f"unsupported space {type(space).__name__}")


@dataclass(frozen=True)
class DirectionalProbeParams:
    xi: float
    eta: float
    candidates: tuple
    base: Point

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("xi must be positive")
        if not 0 < self.eta <= 1 / 3:
            raise DomainError("eta must lie in (0, 1/3]")
        object.__setattr__(self, "candidates", tuple(self.candidates))


@dataclass(frozen=True)
class ProbeResult:
    max_card: int
    witness_subset: list
    upper_bound: int
    exact: bool


def pair_admissible(space: MetricSpace, a: Point, p: Point, q: Point, eta: float) -> bool:
    """True when ``{p, q}`` satisfies the separation condition at ``a``.

    The pair is ordered so that the farther point plays ``b``; equidistant
    pairs must satisfy the condition in both orders.
    """
    dp, dq = space.distance(a, p), space.distance(a, q)
    orders = []
    if dp >= dq:
        orders.append((p, q))
    if dq >= dp:
        orders.append((q, p))
    for b, c in orders:
        dac = space.distance(a, c)
        for x in directional_witness_set(space, a, c, b):
            if space.distance(x, c) / dac < eta - 1e-12:
                return False
    return True


def admissibility_matrix(space: MetricSpace, a: Point, candidates: Sequence[Point], eta: float) -> np.ndarray:
    n = len(candidates)
    adj = np.zeros((n, n), dtype=bool)
    if isinstance(space, Euclidean):
        # strictly convex norm: the condition is a chord between unit directions
        dirs = np.array([c.array for c in candidates]) - a.array
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        chord = np.linalg.norm(dirs[:, None, :] - dirs[None, :, :], axis=2)
        adj = chord >= eta - 1e-12
    else:
        for i in range(n):
            for j in range(i + 1, n):
                adj[i, j] = adj[j, i] = pair_admissible(space, a, candidates[i], candidates[j], eta)
    np.fill_diagonal(adj, False)
    return adj


def directional_limited_probe(space: MetricSpace, params: DirectionalProbeParams) -> ProbeResult:
    """Largest admissible subset of the candidates around ``params.base``.

    Admissibility is pairwise, so this is a maximum clique in the
    admissibility graph: exact for small candidate lists, otherwise a greedy
    clique (lower bound) certified against a clique-cover / LP upper bound.
    ``max_card`` is always achieved by ``witness_subset``.
    """
    cands = list(params.candidates)
    if not cands:
        raise DomainError("candidate list is empty")
    a = params.base
    for c in cands:
        d = space.distance(a, c)
        if d == 0 or d >= params.xi:
            raise DomainError("candidates must lie in the punctured open ball U_xi(a)")
    adj = admissibility_matrix(space, a, cands, params.eta)
    if len(cands) <= EXACT_PROBE_LIMIT:
        best = max_clique_exact(adj)
        return ProbeResult(len(best), [cands[i] for i in best], len(best), True)
    lower, upper = clique_bounds(adj)
    return ProbeResult(len(lower), [cands[i] for i in lower], upper, len(lower) == upper)


@dataclass(frozen=True)
class BallSet:
    """A list of closed Euclidean balls stored as arrays."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        r = np.asarray(self.radii, dtype=float).reshape(-1)
        if c.ndim != 2:
            c = c.reshape(len(r), -1) if c.size else np.empty((len(r), 0))
        if len(c) != len(r):
            raise DomainError("centers and radii differ in length")
        if np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise DomainError("ball radii must be positive and finite")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @classmethod
    def empty(cls, dim: int) -> "BallSet":
        return cls(np.empty((0, dim)), np.empty(0))

    @classmethod
    def from_balls(cls, balls, dim: int) -> "BallSet":
        balls = list(balls)
        if not balls:
            return cls.empty(dim)
        return cls(np.array([b.center.coords for b in balls], dtype=float), np.array([b.radius for b in balls]))

    def __len__(self) -> int:
        return len(self.radii)

    def take(self, idx) -> "BallSet":
        idx = np.asarray(idx, dtype=int)
        return BallSet(self.centers[idx], self.radii[idx])

    def concat(self, other: "BallSet") -> "BallSet":
        if not len(self):
            return other
        if not len(other):
            return self
        return BallSet(np.vstack([self.centers, other.centers]), np.concatenate([self.radii, other.radii]))

    def unique(self) -> "BallSet":
        """Drop repeated (center, radius) rows, keeping first occurrences in order."""
        if not len(self):
            return self
        rows = np.hstack([self.centers, self.radii[:, None]])
        _, first = np.unique(rows, axis=0, return_index=True)
        return self.take(np.sort(first))

    def balls(self, space: Euclidean) -> list[Ball]:
        return [Ball(space.point(c), float(r)) for c, r in zip(self.centers, self.radii)]

    def overlaps(self, slack: float = 1e-12) -> np.ndarray:
        """Pairwise intersection matrix; tangent or nearly tangent balls count as overlapping."""
        d = np.linalg.norm(self.centers[:, None, :] - self.centers[None, :, :], axis=2)
        hit = d <= self.radii[:, None] + self.radii[None, :] + slack
        np.fill_diagonal(hit, False)
        return hit

    def covers(self, points: np.ndarray, slack: float = 1e-12) -> np.ndarray:
        """Boolean matrix ``[ball, point]`` of closed-ball membership."""
        pts = np.atleast_2d(points)
        d = np.linalg.norm(self.centers[:, None, :] - pts[None, :, :], axis=2)
        return d <= self.radii[:, None] + slack
