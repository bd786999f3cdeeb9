"""Constructive Besicovitch-type covering engines in R^n.

``greedy_subfamilies`` realises the covering lemma: repeatedly take the
largest ball whose centre is still uncovered and put it into the first
subfamily where it is disjoint from every member. ``doubling_radii`` and
``besicovitch_with_doubling`` produce disjoint families of "doubling balls"
``B_r(x)`` with ``mu(B_r(x)) <= (gamma + eps0) mu(B_{alpha r}(x))`` inside an
open set, the building block of the lower bound for the packing
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import SignedMeasure, atoms_in, ball_masses
from .metric import BallSet
from .opensets import OpenSet
from .premeasures import PremeasureModel

DISJOINT_SLACK = 1e-12


class SubfamilyBoundExceeded(RuntimeError):
    """The greedy assignment needed more disjoint subfamilies than allowed."""

    def __init__(self, bound: int, ball_index: int, center, radius: float, blockers: list):
        self.bound = bound
        self.ball_index = ball_index
        self.center = tuple(map(float, center))
        self.radius = float(radius)
        self.blockers = blockers
        super().__init__(
            f"ball {ball_index} (center={self.center}, r={self.radius}) meets a member of each of "
            f"the {bound} allowed subfamilies; blocking balls per subfamily: {blockers}"
        )


@dataclass
class BallFamily:
    """Balls together with the point set ``A`` they are centred at."""

    balls: BallSet
    centers_of: np.ndarray

    def __post_init__(self):
        self.centers_of = np.atleast_2d(np.asarray(self.centers_of, dtype=float))
        if len(self.centers_of) and len(self.balls):
            d = np.linalg.norm(self.centers_of[:, None, :] - self.balls.centers[None, :, :], axis=2)
            if not np.all(d.min(axis=1) <= DISJOINT_SLACK):
                raise ValueError("every point of A must be the centre of some ball")
        elif len(self.centers_of):
            raise ValueError("every point of A must be the centre of some ball")

    @classmethod
    def from_balls(cls, balls: BallSet) -> "BallFamily":
        return cls(balls, np.unique(balls.centers, axis=0) if len(balls) else np.empty((0, balls.centers.shape[1])))


@dataclass
class SubfamilyDecomposition:
    subfamilies: list  # lists of ball indices
    selected: list
    pairs_checked: int

    @property
    def count(self) -> int:
        return len(self.subfamilies)


def greedy_subfamilies(family: BallFamily, zeta_bound: int) -> SubfamilyDecomposition:
    """Split a covering subfamily into at most ``zeta_bound`` disjoint subfamilies.

    Ties in radius are broken by input order. Raises
    ``SubfamilyBoundExceeded`` instead of opening subfamily ``zeta_bound + 1``.
    """
    balls, A = family.balls, family.centers_of
    if zeta_bound < 1:
        raise ValueError("zeta_bound must be at least 1")
    uncovered = np.ones(len(A), dtype=bool)
    ball_center_idx = np.argmin(np.linalg.norm(balls.centers[:, None, :] - A[None, :, :], axis=2), axis=1) if len(A) else []
    order = np.lexsort((np.arange(len(balls)), -balls.radii))
    subfamilies: list[list[int]] = []
    selected: list[int] = []
    for i in order:
        if not uncovered[ball_center_idx[i]]:
            continue
        c, r = balls.centers[i], balls.radii[i]
        blockers = []
        home = None
        for k, members in enumerate(subfamilies):
            d = np.linalg.norm(balls.centers[members] - c, axis=1)
            hit = np.flatnonzero(d <= balls.radii[members] + r + DISJOINT_SLACK)
            if not len(hit):
                home = k
                break
            blockers.append(int(members[hit[0]]))
        if home is None:
            if len(subfamilies) >= zeta_bound:
                raise SubfamilyBoundExceeded(zeta_bound, int(i), c, r, blockers)
            subfamilies.append([])
            home = len(subfamilies) - 1
        subfamilies[home].append(int(i))
        selected.append(int(i))
        uncovered &= np.linalg.norm(A - c, axis=1) > r + DISJOINT_SLACK
    pairs = verify_subfamilies(balls, subfamilies, A)
    return SubfamilyDecomposition(subfamilies, selected, pairs)


def verify_subfamilies(balls: BallSet, subfamilies, A: np.ndarray) -> int:
    """Post-hoc check of disjointness within each subfamily and coverage of ``A``."""
    pairs = 0
    for members in subfamilies:
        sub = balls.take(members)
        if len(sub) > 1 and sub.overlaps(DISJOINT_SLACK).any():
            raise AssertionError("subfamily is not pairwise disjoint")
        pairs += len(sub) * (len(sub) - 1) // 2
    chosen = [i for m in subfamilies for i in m]
    if len(A) and (not chosen or not balls.take(chosen).covers(A, DISJOINT_SLACK).any(axis=0).all()):
        raise AssertionError("some centre is not covered")
    return pairs


# --- doubling balls ---------------------------------------------------------


@dataclass(frozen=True)
class DoublingParams:
    alpha: float
    gamma: float
    eps0: float
    r_grid: tuple = ()

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not self.gamma >= 1:
            raise ValueError("gamma must be at least 1")
        if not self.eps0 >= 0:
            raise ValueError("eps0 must be nonnegative")
        grid = tuple(float(r) for r in self.r_grid)
        if any(not (0 < r < math.inf) for r in grid):
            raise ValueError("radius grid must be positive and finite")
        object.__setattr__(self, "r_grid", tuple(sorted(set(grid), reverse=True)))

    @classmethod
    def geometric(cls, alpha: float, gamma: float, eps0: float, delta: float, levels: int = 21) -> "DoublingParams":
        return cls(alpha, gamma, eps0, tuple(delta * 2.0**-k for k in range(levels)))

    def grid_below(self, delta: float) -> tuple:
        grid = tuple(r for r in self.r_grid if r <= delta)
        return grid or tuple(delta * 2.0**-k for k in range(21))


def doubling_mask(mu: SignedMeasure, centers: np.ndarray, radii: np.ndarray, params: DoublingParams) -> np.ndarray:
    big = ball_masses(mu, centers, radii)
    small = ball_masses(mu, centers, params.alpha * radii)
    return big <= (params.gamma + params.eps0) * small


@dataclass
class DoublingRadii:
    radii: list
    extended: bool
    diagnostic: str = ""


def doubling_radii(mu: SignedMeasure, x, params: DoublingParams, grid=None) -> DoublingRadii:
    """Grid radii at ``x`` whose balls satisfy the doubling inequality.

    When none qualifies but the point carries mass, the grid is extended once
    by a decade (four more halvings) before giving up with a diagnostic.
    """
    if not mu.is_nonnegative:
        raise ValueError("doubling radii need a nonnegative measure")
    grid = np.asarray(grid if grid is not None else params.r_grid, dtype=float)
    if not len(grid):
        raise ValueError("radius grid is empty")
    x = np.asarray(x, dtype=float)

    def qualify(rs):
        return [float(r) for r, ok in zip(rs, doubling_mask(mu, np.tile(x, (len(rs), 1)), rs, params)) if ok]

    found = qualify(grid)
    if found:
        return DoublingRadii(found, False)
    if ball_masses(mu, x[None, :], grid[-1:])[0] <= 0:
        return DoublingRadii([], False, "no mass near the point")
    ext = grid[-1] * 2.0 ** -np.arange(1, 5)
    found = qualify(ext)
    note = "" if found else f"no doubling radius down to {ext[-1]:.3g} at a point carrying mass"
    return DoublingRadii(found, True, note)


@dataclass
class DoublingCover:
    balls: BallSet
    points: np.ndarray
    covered: np.ndarray
    uncovered_mass: float
    rounds: int
    diagnostics: list = field(default_factory=list)

    @property
    def uncovered(self) -> np.ndarray:
        return self.points[~self.covered]

    @property
    def status(self) -> str:
        return "ok" if self.uncovered_mass <= 0 else "failed"


def besicovitch_with_doubling(A, U: OpenSet, mu: SignedMeasure, params: DoublingParams, delta: float,
                              zeta_bound: int = 64, max_rounds: int = 200) -> DoublingCover:
    """Disjoint doubling balls of radius <= delta inside ``U`` covering ``A`` within ``U``.

    Each round gives every still uncovered point the largest admissible
    doubling radius whose ball avoids the balls already chosen, splits these
    balls into disjoint subfamilies and keeps the subfamily of largest mass.
    Points with no admissible ball are reported with the mass they carry.
    """
    if not mu.is_nonnegative:
        raise ValueError("the doubling cover needs a nonnegative measure")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    pts = A[U.contains(A)] if len(A) else A
    dim = U.dim
    grid = np.asarray(params.grid_below(delta))
    options: list[np.ndarray] = []
    diagnostics = []
    for x in pts:
        res = doubling_radii(mu, x, params, grid)
        if res.diagnostic:
            diagnostics.append((tuple(map(float, x)), res.diagnostic))
        rs = np.asarray(res.radii, dtype=float)
        rs = rs[U.holds_balls(np.tile(x, (len(rs), 1)), rs, np.zeros(len(rs)))] if len(rs) else rs
        options.append(np.sort(rs)[::-1])

    chosen = BallSet.empty(dim)
    covered = np.zeros(len(pts), dtype=bool)
    rounds = 0
    while rounds < max_rounds and not covered.all():
        centers, radii = [], []
        for k in np.flatnonzero(~covered):
            for r in options[k]:
                if len(chosen):
                    d = np.linalg.norm(chosen.centers - pts[k], axis=1)
                    if np.any(d <= chosen.radii + r + DISJOINT_SLACK):
                        continue
                centers.append(pts[k])
                radii.append(r)
                break
        if not centers:
            break
        rounds += 1
        fam = BallFamily(BallSet(np.array(centers), np.array(radii)), np.array(centers))
        dec = greedy_subfamilies(fam, zeta_bound)
        masses = ball_masses(mu, fam.balls.centers, fam.balls.radii)
        best = max(dec.subfamilies, key=lambda m: (math.fsum(masses[m]), -min(m)))
        chosen = chosen.concat(fam.balls.take(best))
        covered |= chosen.covers(pts, DISJOINT_SLACK).any(axis=0)

    verify_doubling_cover(chosen, U, mu, params)
    lost = pts[~covered]
    uncovered_mass = float(mu.atom_weights[atoms_in(mu, lost)].sum()) if len(lost) and len(mu.atoms) else 0.0
    return DoublingCover(chosen, pts, covered, uncovered_mass, rounds, diagnostics)


def verify_doubling_cover(balls: BallSet, U: OpenSet, mu: SignedMeasure, params: DoublingParams) -> None:
    if not len(balls):
        return
    if len(balls) > 1 and balls.overlaps(DISJOINT_SLACK).any():
        raise AssertionError("doubling balls intersect")
    if not np.all(U.holds_balls(balls.centers, balls.radii, np.zeros(len(balls)))):
        raise AssertionError("doubling ball leaves the open set")
    if not np.all(doubling_mask(mu, balls.centers, balls.radii, params)):
        raise AssertionError("doubling inequality fails on a returned ball")


def lower_bound_margins(balls: BallSet, q: PremeasureModel, mu: SignedMeasure, C: float, params: DoublingParams) -> np.ndarray:
    """Per-ball ``q(B) - mu(B) / (C (gamma + eps0))``; nonnegative when the bound certificate holds."""
    if not len(balls):
        return np.empty(0)
    return q.values(balls.centers, balls.radii) - ball_masses(mu, balls.centers, balls.radii) / (C * (params.gamma + params.eps0))
