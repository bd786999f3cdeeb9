"""Open subsets of R^n used as packing domains.

Each descriptor answers three questions: membership, a lower bound on the
distance to the complement ("clearance"), and which part of a segment lies
inside (for exact mass of polylines). Clearance is exact for single balls,
boxes and neighbourhoods of a point or a convex support piece; for unions it is
the best clearance over the parts, so ball containment is decided
conservatively: a closed ball counts as inside a union only if it sits inside
one part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLIP_TOL = 1e-12


class OpenSet:
    dim: int

    def clearance(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.clearance(np.atleast_2d(points)) > 0

    def clip_intervals(self, p0: np.ndarray, p1: np.ndarray) -> list[tuple[float, float]]:
        """Parameter intervals ``t`` in [0, 1] with ``p0 + t (p1 - p0)`` inside."""
        raise NotImplementedError

    def clip_length(self, p0, p1) -> float:
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        ivs = merge_intervals(self.clip_intervals(p0, p1))
        return float(sum(b - a for a, b in ivs) * np.linalg.norm(p1 - p0))

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def holds_ball(self, center: np.ndarray, radius: float, margin: float = 0.0) -> bool:
        return bool(self.clearance(np.atleast_2d(center))[0] > radius + margin)

    def holds_balls(self, centers: np.ndarray, radii: np.ndarray, margins: np.ndarray) -> np.ndarray:
        return self.clearance(np.atleast_2d(centers)) > radii + margins


OpenSetDescriptor = OpenSet


def merge_intervals(ivs):
    ivs = sorted((a, b) for a, b in ivs if b > a)
    out: list[list[float]] = []
    for a, b in ivs:
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _ball_interval(p0, p1, center, radius):
    d = p1 - p0
    dd = float(d @ d)
    t0 = float((center - p0) @ d) / dd
    perp = center - (p0 + t0 * d)
    h2 = float(perp @ perp)
    if h2 >= radius * radius:
        return None
    half = np.sqrt(radius * radius - h2) / np.sqrt(dd)
    lo, hi = max(t0 - half, 0.0), min(t0 + half, 1.0)
    return (lo, hi) if hi > lo else None


@dataclass(frozen=True)
class OpenBall(OpenSet):
    center: tuple
    radius: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def clearance(self, points):
        return self.radius - np.linalg.norm(np.atleast_2d(points) - np.asarray(self.center), axis=1)

    def clip_intervals(self, p0, p1):
        iv = _ball_interval(p0, p1, np.asarray(self.center, float), self.radius)
        return [iv] if iv else []

    def bbox(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class OpenBox(OpenSet):
    low: tuple
    high: tuple

    @property
    def dim(self) -> int:
        return len(self.low)

    def clearance(self, points):
        pts = np.atleast_2d(points)
        lo, hi = np.asarray(self.low, float), np.asarray(self.high, float)
        return np.minimum(pts - lo, hi - pts).min(axis=1)

    def clip_intervals(self, p0, p1):
        lo, hi = np.asarray(self.low, float), np.asarray(self.high, float)
        d = p1 - p0
        t_lo, t_hi = 0.0, 1.0
        for k in range(len(d)):
            if d[k] == 0:
                if not lo[k] < p0[k] < hi[k]:
                    return []
                continue
            a, b = (lo[k] - p0[k]) / d[k], (hi[k] - p0[k]) / d[k]
            t_lo, t_hi = max(t_lo, min(a, b)), min(t_hi, max(a, b))
        return [(t_lo, t_hi)] if t_hi > t_lo else []

    def bbox(self):
        return np.asarray(self.low, float), np.asarray(self.high, float)


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    d = b - a
    t = np.clip(((pts - a) @ d) / float(d @ d), 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * d), axis=1)


@dataclass(frozen=True)
class Neighborhood(OpenSet):
    """``{y : dist(y, S) < eps}`` for a finite point set and/or polylines ``S``."""

    eps: float
    points: tuple = ()
    polylines: tuple = ()
    _pts: np.ndarray = field(init=False, repr=False, compare=False)
    _segs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("neighbourhood radius must be positive")
        pts = np.array([tuple(p) for p in self.points], dtype=float)
        lines = [np.asarray(pl, dtype=float) for pl in self.polylines]
        dim = pts.shape[1] if pts.size else (lines[0].shape[1] if lines else 0)
        if dim == 0:
            raise ValueError("neighbourhood needs a nonempty support")
        pts = pts.reshape(-1, dim)
        a = [pl[:-1] for pl in lines]
        b = [pl[1:] for pl in lines]
        segs = (np.vstack(a) if a else np.empty((0, dim)), np.vstack(b) if b else np.empty((0, dim)))
        object.__setattr__(self, "_pts", pts)
        object.__setattr__(self, "_segs", segs)

    @property
    def dim(self) -> int:
        return self._pts.shape[1]

    def support_distance(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        best = np.full(len(pts), np.inf)
        if len(self._pts):
            best = np.linalg.norm(pts[:, None, :] - self._pts[None, :, :], axis=2).min(axis=1)
        for a, b in zip(*self._segs):
            best = np.minimum(best, point_segment_distance(pts, a, b))
        return best

    def clearance(self, points):
        return self.eps - self.support_distance(points)

    def clip_intervals(self, p0, p1):
        out = []
        for q in self._pts:
            iv = _ball_interval(p0, p1, q, self.eps)
            if iv:
                out.append(iv)
        for a, b in zip(*self._segs):
            iv = _capsule_interval(p0, p1, a, b, self.eps)
            if iv:
                out.append(iv)
        return out

    def bbox(self):
        parts = [self._pts] + [self._segs[0], self._segs[1]]
        allp = np.vstack([p for p in parts if len(p)])
        return allp.min(axis=0) - self.eps, allp.max(axis=0) + self.eps


def _capsule_interval(p0, p1, a, b, eps):
    """Interval of ``t`` where the moving point is within ``eps`` of segment ab.

    The distance is convex in ``t``, so the sublevel set is an interval: locate
    the minimiser by golden-section search, then bisect both ends.
    """
    d = p1 - p0

    def f(t):
        return float(point_segment_distance((p0 + t * d)[None, :], a, b)[0])

    lo, hi = 0.0, 1.0
    g = (np.sqrt(5) - 1) / 2
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-13:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
    tm = (lo + hi) / 2
    candidates = [0.0, tm, 1.0]
    tm = min(candidates, key=f)
    if f(tm) >= eps:
        return None

    def edge(inside, outside):
        if f(outside) < eps:
            return outside
        for _ in range(80):
            mid = (inside + outside) / 2
            if f(mid) < eps:
                inside = mid
            else:
                outside = mid
            if abs(outside - inside) < CLIP_TOL:
                break
        return (inside + outside) / 2

    return edge(tm, 0.0), edge(tm, 1.0)


@dataclass(frozen=True)
class Union(OpenSet):
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("union of no open sets")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def clearance(self, points):
        return np.max([p.clearance(points) for p in self.parts], axis=0)

    def clip_intervals(self, p0, p1):
        return [iv for p in self.parts for iv in p.clip_intervals(p0, p1)]

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)
