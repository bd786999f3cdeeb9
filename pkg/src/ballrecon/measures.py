"""Signed measures made of atoms and constant-density polylines.

Both ingredients admit exact evaluation on closed balls: atoms by distance
comparison, polylines by segment/sphere chord lengths. These values serve as
ground truth for every construction in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metric import Ball, DomainError, Euclidean, MetricSpace, Point

BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class Atom:
    position: Point
    weight: float

    def __post_init__(self):
        if not math.isfinite(self.weight) or self.weight == 0:
            raise DomainError(f"atom weight must be finite and nonzero, got {self.weight!r}")


@dataclass(frozen=True)
class PolylineChain:
    vertices: tuple
    density: float

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(verts) < 2:
            raise DomainError("a chain needs at least two vertices")
        arr = np.array([v.coords for v in verts], dtype=float)
        steps = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        if np.any(steps == 0):
            raise DomainError("consecutive chain vertices must be distinct")
        if not math.isfinite(self.density):
            raise DomainError("chain density must be finite")
        object.__setattr__(self, "vertices", verts)

    @property
    def array(self) -> np.ndarray:
        return np.array([v.coords for v in self.vertices], dtype=float)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.array, axis=0), axis=1).sum())

    def points_at(self, arcs: np.ndarray) -> np.ndarray:
        """Points at the given arc-length positions (clipped to the chain)."""
        arr = self.array
        seg = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        arcs = np.clip(np.asarray(arcs, dtype=float), 0.0, cum[-1])
        k = np.clip(np.searchsorted(cum, arcs, side="right") - 1, 0, len(seg) - 1)
        frac = (arcs - cum[k]) / seg[k]
        return arr[k] + frac[:, None] * (arr[k + 1] - arr[k])


@dataclass(frozen=True)
class SignedMeasure:
    space: MetricSpace
    atoms: tuple = ()
    chains: tuple = ()
    _atom_pos: np.ndarray = field(init=False, repr=False, compare=False)
    _atom_w: np.ndarray = field(init=False, repr=False, compare=False)
    _segments: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms, chains = tuple(self.atoms), tuple(self.chains)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "chains", chains)
        for a in atoms:
            self.space.check(a.position)
        if chains and not isinstance(self.space, Euclidean):
            raise DomainError("polyline chains are only supported in Euclidean spaces")
        for ch in chains:
            for v in ch.vertices:
                self.space.check(v)
        if isinstance(self.space, Euclidean):
            pos = np.array([a.position.coords for a in atoms], dtype=float).reshape(-1, self.space.dim)
        else:
            pos = np.empty((len(atoms), 0))
        object.__setattr__(self, "_atom_pos", pos)
        object.__setattr__(self, "_atom_w", np.array([a.weight for a in atoms], dtype=float))
        p0, p1, dens = [], [], []
        for ch in chains:
            arr = ch.array
            p0.append(arr[:-1])
            p1.append(arr[1:])
            dens.append(np.full(len(arr) - 1, ch.density))
        if chains:
            segs = (np.vstack(p0), np.vstack(p1), np.concatenate(dens))
        else:
            dim = self.space.dim if isinstance(self.space, Euclidean) else 0
            segs = (np.empty((0, dim)), np.empty((0, dim)), np.empty(0))
        object.__setattr__(self, "_segments", segs)

    @classmethod
    def from_data(cls, space: MetricSpace, atoms=(), chains=()) -> "SignedMeasure":
        """Build from plain data: ``atoms=[(coords, w)]``, ``chains=[(vertex list, density)]``."""
        at = [Atom(p if isinstance(p, Point) else _as_point(space, p), float(w)) for p, w in atoms]
        ch = [PolylineChain(tuple(_as_point(space, v) for v in verts), float(d)) for verts, d in chains]
        return cls(space, tuple(at), tuple(ch))

    @property
    def is_euclidean(self) -> bool:
        return isinstance(self.space, Euclidean)

    @property
    def atom_positions(self) -> np.ndarray:
        return self._atom_pos

    @property
    def atom_weights(self) -> np.ndarray:
        return self._atom_w

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._segments

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self._atom_w > 0) and all(c.density >= 0 for c in self.chains))

    def atom_distances(self, center: Point) -> np.ndarray:
        self.space.check(center)
        if self.is_euclidean:
            return np.linalg.norm(self._atom_pos - center.array, axis=1)
        return np.array([self.space.distance(center, a.position) for a in self.atoms])

    def support_points(self) -> np.ndarray:
        """Atom positions followed by chain vertices (Euclidean only)."""
        parts = [self._atom_pos] + [c.array for c in self.chains]
        return np.vstack(parts) if parts else np.empty((0, self.space.dim))


def _as_point(space: MetricSpace, p) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, (tuple, list, np.ndarray)):
        return space.point(*p) if not isinstance(space, Euclidean) else space.point(p)
    return space.point(p)


def segment_chords(p0: np.ndarray, p1: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Length of each segment inside each closed ball, shape ``(len(centers), len(p0))``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float).reshape(-1)
    d = p1 - p0
    seg_len = np.linalg.norm(d, axis=1)
    u = d / seg_len[:, None]
    w = centers[:, None, :] - p0[None, :, :]
    t0 = np.einsum("msk,sk->ms", w, u)
    perp = w - t0[..., None] * u[None, :, :]
    h2 = np.einsum("msk,msk->ms", perp, perp)
    r2 = (radii**2)[:, None]
    half = np.sqrt(np.maximum(r2 - h2, 0.0))
    lo = np.maximum(t0 - half, 0.0)
    hi = np.minimum(t0 + half, seg_len[None, :])
    chord = np.maximum(hi - lo, 0.0)
    return np.where(h2 <= r2, chord, 0.0)


def ball_masses(mu: SignedMeasure, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Vectorised ``mu(B_r(x))`` over rows of ``centers`` (Euclidean measures)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float).reshape(-1)
    out = np.zeros(len(centers))
    if len(mu.atoms):
        dist = np.linalg.norm(centers[:, None, :] - mu.atom_positions[None, :, :], axis=2)
        out += np.where(dist <= radii[:, None] + BOUNDARY_SLACK, mu.atom_weights[None, :], 0.0).sum(axis=1)
    p0, p1, dens = mu.segments
    if len(dens):
        out += segment_chords(p0, p1, centers, radii) @ dens
    return out


def ball_mass(mu: SignedMeasure, ball: Ball) -> float:
    mu.space.check(ball.center)
    if mu.is_euclidean:
        return float(ball_masses(mu, ball.center.array[None, :], np.array([ball.radius]))[0])
    dist = mu.atom_distances(ball.center)
    return float(mu.atom_weights[dist <= ball.radius + BOUNDARY_SLACK].sum())


def hahn_split(mu: SignedMeasure) -> tuple[SignedMeasure, SignedMeasure]:
    """Positive and negative parts; atoms and chains split by the sign of their weight."""
    plus_atoms = tuple(a for a in mu.atoms if a.weight > 0)
    minus_atoms = tuple(Atom(a.position, -a.weight) for a in mu.atoms if a.weight < 0)
    plus_chains = tuple(c for c in mu.chains if c.density > 0)
    minus_chains = tuple(PolylineChain(c.vertices, -c.density) for c in mu.chains if c.density < 0)
    return (
        SignedMeasure(mu.space, plus_atoms, plus_chains),
        SignedMeasure(mu.space, minus_atoms, minus_chains),
    )


def total_variation(mu: SignedMeasure) -> SignedMeasure:
    plus, minus = hahn_split(mu)
    return SignedMeasure(mu.space, plus.atoms + minus.atoms, plus.chains + minus.chains)


def total_mass(mu: SignedMeasure, region=None) -> float:
    """Mass of an open region (an ``OpenSet``), or of the whole space when ``region`` is None."""
    if region is None:
        return float(mu.atom_weights.sum() + sum(c.length * c.density for c in mu.chains))
    total = 0.0
    if len(mu.atoms):
        inside = region.contains(mu.atom_positions)
        total += float(mu.atom_weights[inside].sum())
    p0, p1, dens = mu.segments
    for a, b, rho in zip(p0, p1, dens):
        total += region.clip_length(a, b) * rho
    return total


# --- reference measures -----------------------------------------------------


@dataclass(frozen=True)
class Lebesgue:
    dim: int

    def ball_measure(self, radius: float) -> float:
        n = self.dim
        return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n


@dataclass(frozen=True)
class SelfMeasure:
    measure: SignedMeasure
    sample_points: int = 50
    radii: tuple = (1e-2, 1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class GammaEstimate:
    gamma: float
    exact: bool
    centers: np.ndarray = field(repr=False)
    radii: tuple = ()
    note: str = ""


def support_samples(mu: SignedMeasure, count: int) -> np.ndarray:
    """Deterministic support sample: all atoms plus evenly spaced arc positions on chains."""
    pts = [mu.atom_positions]
    total = sum(c.length for c in mu.chains)
    for c in mu.chains:
        k = max(2, int(round(count * c.length / total))) if total > 0 else 2
        pts.append(c.points_at(np.linspace(0.0, c.length, k)))
    return np.vstack(pts)


def self_measure_gamma(ref: SelfMeasure, alpha: float) -> GammaEstimate:
    mu = ref.measure
    if not mu.is_nonnegative:
        raise DomainError("a reference measure must be nonnegative")
    centers = support_samples(mu, ref.sample_points)
    worst = 0.0
    for r in ref.radii:
        big = ball_masses(mu, centers, np.full(len(centers), r))
        small = ball_masses(mu, centers, np.full(len(centers), alpha * r))
        ratio = np.where(small > 0, big / np.where(small > 0, small, 1.0), np.inf)
        worst = max(worst, float(ratio.max()))
    return GammaEstimate(
        worst,
        exact=False,
        centers=centers,
        radii=tuple(ref.radii),
        note="sampled on the support only; the measure vanishes on balls away from it",
    )


def gamma_for_reference(kind, alpha: float) -> float:
    """Asymptotic ball ratio bound ``limsup nu(B_r)/nu(B_{alpha r})``."""
    return gamma_estimate(kind, alpha).gamma


def gamma_estimate(kind, alpha: float) -> GammaEstimate:
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if isinstance(kind, Lebesgue):
        return GammaEstimate(alpha ** (-kind.dim), exact=True, centers=np.empty((0, kind.dim)))
    if isinstance(kind, SelfMeasure):
        return self_measure_gamma(kind, alpha)
    raise DomainError(f"unknown reference kind {kind!r}")


@dataclass(frozen=True)
class ReferenceMeasure:
    kind: object
    alpha: float
    gamma: float

    @classmethod
    def build(cls, kind, alpha: float) -> "ReferenceMeasure":
        return cls(kind, alpha, gamma_for_reference(kind, alpha))


def atoms_in(mu: SignedMeasure, points: Sequence) -> np.ndarray:
    """Boolean mask of atoms coinciding (within slack) with any of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not len(mu.atoms) or not len(pts):
        return np.zeros(len(mu.atoms), dtype=bool)
    d = np.linalg.norm(mu.atom_positions[:, None, :] - pts[None, :, :], axis=2)
    return (d <= BOUNDARY_SLACK).any(axis=1)
