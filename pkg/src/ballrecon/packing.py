"""Packing construction over disjoint closed balls inside open sets.

``hat_delta(U)`` is the supremum of ``sum q(B)`` over families of disjoint
closed balls of radius <= delta contained in the open set ``U``. Here the
supremum runs over a finite candidate list, so solved values are lower bounds
of the true supremum (equal to the finite-candidate optimum when the status
is ``exact``). ``hat(U)`` is the infimum over the delta schedule, and sets that
are not open are handled by outer regularisation through epsilon
neighbourhoods.

Conventions: delta bounds the radius (the covering module bounds the
diameter); a candidate must clear the boundary of ``U`` by a margin
``tau = margin_frac * radius``; balls whose centres are within
``r_i + r_j + 1e-12`` of each other count as overlapping, tangency included.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import solvers
from .measures import SignedMeasure, ReferenceMeasure, total_mass, total_variation
from .metric import BallSet
from .opensets import Neighborhood, OpenSet, point_segment_distance
from .premeasures import BoundCertificate, PremeasureModel

DISJOINT_SLACK = 1e-12
SPACING_PAD = 1e-6


@dataclass(frozen=True)
class PackingStrategy:
    radius_levels: int = 4
    lattice: bool = True
    lattice_factor: float = 1 / 2
    chain_offsets: int = 2
    fitted: bool = True
    margin_frac: float = 0.01
    jiggle: bool = False
    jiggle_steps: int = 20
    reduce: bool = True
    nested: bool = False


@dataclass
class PackingInstance:
    open_set: OpenSet
    delta: float
    candidates: BallSet
    premeasure: PremeasureModel
    margin_frac: float = 0.01

    def __post_init__(self):
        c = self.candidates
        if len(c):
            if np.any(c.radii > self.delta * (1 + 1e-12)):
                raise ValueError("candidate radius exceeds delta")
            if not np.all(self.open_set.holds_balls(c.centers, c.radii, self.margin_frac * c.radii)):
                raise ValueError("candidate ball not contained in the open set with the required margin")


@dataclass
class PackingResult:
    chosen: BallSet
    value: float
    solver_status: str
    conflict_count_checked: int
    n_candidates: int = 0
    n_reduced: int = 0


def _radius_grid(delta: float, levels: int) -> list[float]:
    return [delta * 2.0**-k for k in range(levels)]


def _lattice(lo, hi, pitch):
    axes = [np.arange(math.floor(a / pitch), math.ceil(b / pitch) + 1) * pitch for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def support_distance(mu: SignedMeasure, points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    best = np.full(len(pts), np.inf)
    if len(mu.atoms):
        best = np.linalg.norm(pts[:, None, :] - mu.atom_positions[None, :, :], axis=2).min(axis=1)
    p0, p1, _ = mu.segments
    for a, b in zip(p0, p1):
        best = np.minimum(best, point_segment_distance(pts, a, b))
    return best


def _isolating_radii(positions: np.ndarray) -> np.ndarray:
    """Just under half the distance to the nearest other atom (inf for a lone atom)."""
    if len(positions) < 2:
        return np.full(len(positions), np.inf)
    d = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    return 0.49 * d.min(axis=1)


def _fit(clearance, margin_frac, delta):
    return np.minimum(delta, clearance / (1 + margin_frac) * (1 - 1e-9))


def generate_packing_candidates(U: OpenSet, delta: float, mu: SignedMeasure, strategy: PackingStrategy | None = None,
                                premeasure: PremeasureModel | None = None) -> BallSet:
    """Candidate balls of radius <= delta lying inside ``U`` with margin.

    Centres: atoms of ``mu`` in ``U`` (grid radii plus the largest radius that
    fits and an isolating radius), arc-length samples along chains spaced just
    over ``2r`` for each radius, and an origin-anchored lattice of pitch
    ``delta * lattice_factor`` near the support. ``jiggle`` adds copies of
    candidates moved by coordinate search to raise ``premeasure``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    st = strategy or PackingStrategy()
    dim = U.dim
    grid = _radius_grid(delta, st.radius_levels)
    parts: list[BallSet] = []

    if len(mu.atoms):
        pos = mu.atom_positions
        inside = U.contains(pos)
        pos = pos[inside]
        if len(pos):
            radii_per = [np.tile(grid, (len(pos), 1))]
            if st.fitted:
                clear = U.clearance(pos)
                fit = _fit(clear, st.margin_frac, delta)
                iso = np.minimum(_isolating_radii(mu.atom_positions)[inside], fit)
                radii_per += [fit[:, None], iso[:, None]]
            rr = np.hstack(radii_per)
            parts.append(BallSet(np.repeat(pos, rr.shape[1], axis=0), rr.ravel()))

    for chain in mu.chains:
        length = chain.length
        radii = list(grid)
        if st.fitted:
            probe = chain.points_at(np.linspace(0, length, 257))
            clear = U.clearance(probe)
            clear = clear[clear > 0]
            if len(clear):
                radii += sorted(set(_fit(np.quantile(clear, [0.5, 1.0]), st.margin_frac, delta).tolist()))
        for r in radii:
            step = 2 * r * (1 + SPACING_PAD)
            for j in range(st.chain_offsets):
                start = j * step / st.chain_offsets
                arcs = np.arange(start, length + 1e-15, step)
                if len(arcs):
                    pts = chain.points_at(arcs)
                    parts.append(BallSet(pts, np.full(len(pts), r)))

    if st.lattice and (len(mu.atoms) or len(mu.chains)):
        lo, hi = U.bbox()
        sup = mu.support_points()
        lo = np.maximum(lo, sup.min(axis=0) - delta)
        hi = np.minimum(hi, sup.max(axis=0) + delta)
        if np.all(hi >= lo):
            pts = _lattice(lo, hi, delta * st.lattice_factor)
            pts = pts[support_distance(mu, pts) <= delta]
            pts = pts[U.contains(pts)] if len(pts) else pts
            if len(pts):
                parts.append(BallSet(np.repeat(pts, len(grid), axis=0), np.tile(grid, len(pts))))

    out = BallSet.empty(dim)
    for p in parts:
        out = out.concat(p)
    if not len(out):
        return out
    out = out.take(np.flatnonzero(U.holds_balls(out.centers, out.radii, st.margin_frac * out.radii)))
    out = out.unique()
    if st.jiggle and premeasure is not None and len(out):
        out = out.concat(jiggle(out, U, premeasure, st)).unique()
    return out


def jiggle(balls: BallSet, U: OpenSet, premeasure: PremeasureModel, strategy: PackingStrategy) -> BallSet:
    """Coordinate search on each centre (radius fixed) to increase the premeasure."""
    centers = balls.centers.copy()
    radii = balls.radii
    best = premeasure.values(centers, radii)
    dim = centers.shape[1]
    step = radii / 4
    for _ in range(strategy.jiggle_steps):
        moved = np.zeros(len(radii), dtype=bool)
        for k in range(dim):
            for sgn in (1.0, -1.0):
                trial = centers.copy()
                trial[:, k] += sgn * step
                ok = U.holds_balls(trial, radii, strategy.margin_frac * radii)
                vals = np.where(ok, premeasure.values(trial, radii), -np.inf)
                better = vals > best
                centers[better] = trial[better]
                best[better] = vals[better]
                moved |= better
        step = np.where(moved, step, step / 2)
    changed = np.flatnonzero(np.any(centers != balls.centers, axis=1))
    return BallSet(centers[changed].reshape(len(changed), dim), radii[changed])


def dominance_reduce(balls: BallSet, weights: np.ndarray) -> np.ndarray:
    """Indices of balls that survive dominance pruning.

    A ball is dropped when disjoint smaller kept balls strictly inside it
    already carry at least its weight: swapping them in never breaks a
    packing nor lowers its value, so the optimum is unchanged.
    """
    order = np.lexsort((np.arange(len(balls)), balls.radii))
    kept: list[int] = []
    for i in order:
        if kept:
            k = np.asarray(kept)
            gap = balls.radii[i] - (np.linalg.norm(balls.centers[k] - balls.centers[i], axis=1) + balls.radii[k])
            inner = k[gap > DISJOINT_SLACK]
            if len(inner):
                inner = inner[np.lexsort((inner, -weights[inner]))]
                picked: list[int] = []
                total = 0.0
                for j in inner:
                    if picked:
                        d = np.linalg.norm(balls.centers[picked] - balls.centers[j], axis=1)
                        if np.any(d <= balls.radii[picked] + balls.radii[j] + DISJOINT_SLACK):
                            continue
                    picked.append(int(j))
                    total += weights[j]
                if total >= weights[i]:
                    continue
        kept.append(int(i))
    return np.sort(np.asarray(kept, dtype=int))


def verify_packing(chosen: BallSet, U: OpenSet | None = None, margin_frac: float = 0.0) -> int:
    """Check pairwise disjointness (and containment); returns the number of pairs checked."""
    n = len(chosen)
    if n > 1:
        hit = chosen.overlaps(DISJOINT_SLACK)
        if hit.any():
            i, j = map(int, np.argwhere(hit)[0])
            raise AssertionError(f"packing balls {i} and {j} intersect")
    if U is not None and n and not np.all(U.holds_balls(chosen.centers, chosen.radii, margin_frac * chosen.radii)):
        raise AssertionError("packing ball leaves the open set")
    return n * (n - 1) // 2


def solve_packing(balls: BallSet, weights: np.ndarray, exact_threshold: int = 40, reduce: bool = True):
    """Maximum-weight disjoint subfamily; returns (indices, status, n_after_reduction)."""
    pos = np.flatnonzero(weights > 0)
    if not len(pos):
        return [], "exact", 0
    sub = balls.take(pos)
    w = weights[pos]
    keep = dominance_reduce(sub, w) if reduce and len(sub) <= 4000 else np.arange(len(sub))
    sub, w, pos = sub.take(keep), w[keep], pos[keep]
    sel = solvers.max_weight_independent_set(w, sub.overlaps(DISJOINT_SLACK), exact_threshold)
    return sorted(int(pos[i]) for i in sel.indices), sel.status, len(keep)


def max_packing_value(instance: PackingInstance, exact_threshold: int = 40, reduce: bool = True) -> PackingResult:
    cands = instance.candidates
    dim = instance.open_set.dim
    if not len(cands):
        return PackingResult(BallSet.empty(dim), 0.0, "exact", 0, 0, 0)
    q = instance.premeasure.values(cands.centers, cands.radii)
    idx, status, n_red = solve_packing(cands, q, exact_threshold, reduce)
    chosen = cands.take(idx) if idx else BallSet.empty(dim)
    checked = verify_packing(chosen, instance.open_set, instance.margin_frac)
    return PackingResult(chosen, math.fsum(q[i] for i in idx), status, checked, len(cands), n_red)


@dataclass
class PackingSweep:
    deltas: list
    results: list
    limit: float
    violations: list = field(default_factory=list)
    runtimes_ms: list = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.results]

    @property
    def all_exact(self) -> bool:
        return all(r.solver_status == "exact" for r in self.results)


def _check_schedule(values, name):
    vals = [float(v) for v in values]
    if not vals or any(b >= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"{name} schedule must be nonempty and strictly decreasing")
    return vals


def packing_sweep(U: OpenSet, premeasure: PremeasureModel, delta_schedule, strategy: PackingStrategy | None = None,
                  exact_threshold: int = 40, threads: int = 1) -> PackingSweep:
    """Packing values along a decreasing delta schedule; the limit is their minimum."""
    deltas = _check_schedule(delta_schedule, "delta")
    st = strategy or PackingStrategy()
    mu = premeasure.measure

    def generate(delta):
        return generate_packing_candidates(U, delta, mu, st, premeasure)

    def solve(delta, cands, t_gen=0.0):
        t0 = time.perf_counter()
        res = max_packing_value(PackingInstance(U, delta, cands, premeasure, st.margin_frac), exact_threshold, st.reduce)
        return res, t_gen + (time.perf_counter() - t0) * 1e3

    if st.nested:
        # candidates at delta include those of every smaller delta, so the
        # finite suprema are nondecreasing in delta like the true ones
        t0 = time.perf_counter()
        per = [generate(d) for d in deltas]
        acc = per[-1]
        cands = [None] * len(deltas)
        for i in range(len(deltas) - 1, -1, -1):
            acc = acc.concat(per[i]).unique() if i < len(deltas) - 1 else acc
            cands[i] = acc
        t_gen = (time.perf_counter() - t0) * 1e3 / len(deltas)
        jobs = [(d, c, t_gen) for d, c in zip(deltas, cands)]
    else:
        jobs = None

    def run(i):
        if jobs is not None:
            return solve(*jobs[i])
        t0 = time.perf_counter()
        cands = generate(deltas[i])
        return solve(deltas[i], cands, (time.perf_counter() - t0) * 1e3)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(run, range(len(deltas))))
    else:
        out = [run(i) for i in range(len(deltas))]
    results = [r for r, _ in out]
    vals = [r.value for r in results]
    violations = [(deltas[i], deltas[i + 1]) for i in range(len(vals) - 1) if vals[i + 1] > vals[i] + 1e-12]
    return PackingSweep(deltas, results, min(vals), violations, [t for _, t in out])


# --- sets that are not open -------------------------------------------------


@dataclass(frozen=True)
class CompactSet:
    """A finite point set and/or polylines in R^n."""

    points: tuple = ()
    polylines: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(tuple(map(float, p)) for p in self.points))
        object.__setattr__(self, "polylines", tuple(np.asarray(pl, dtype=float) for pl in self.polylines))

    def __hash__(self):
        return hash((self.points, tuple(pl.tobytes() for pl in self.polylines)))

    def __eq__(self, other):
        return isinstance(other, CompactSet) and hash(self) == hash(other)

    @property
    def is_empty(self) -> bool:
        return not self.points and not self.polylines

    def neighborhood(self, eps: float) -> Neighborhood:
        return Neighborhood(eps, self.points, tuple(self.polylines))

    def samples(self, pitch: float = 1e-3) -> np.ndarray:
        pts = [np.asarray(self.points, dtype=float).reshape(len(self.points), -1)] if self.points else []
        for pl in self.polylines:
            for a, b in zip(pl[:-1], pl[1:]):
                k = max(2, int(math.ceil(np.linalg.norm(b - a) / pitch)) + 1)
                t = np.linspace(0, 1, k)[:, None]
                pts.append(a + t * (b - a))
        return np.vstack(pts) if pts else np.empty((0, 0))

    def mass(self, mu: SignedMeasure, thickness: float = 1e-9) -> float:
        """``mu(A)`` via the thin neighbourhood ``U_thickness(A)``.

        Exact for atoms lying on ``A``; for chain pieces running along ``A`` the
        error is of order ``thickness``.
        """
        if self.is_empty:
            return 0.0
        return total_mass(mu, self.neighborhood(thickness))


@dataclass
class OuterEstimate:
    value: float
    eps: list
    per_eps: list
    sweeps: list
    best_eps: float
    best_open_set: OpenSet | None

    @property
    def all_exact(self) -> bool:
        return all(s.all_exact for s in self.sweeps)


def outer_regularize(A: CompactSet, premeasure: PremeasureModel, eps_schedule, delta_schedule,
                     strategy: PackingStrategy | None = None, exact_threshold: int = 40, threads: int = 1) -> OuterEstimate:
    """Estimate ``hat(A)`` as the minimum of ``hat(U_eps(A))`` over the epsilon schedule.

    The neighbourhoods are a subfamily of all open supersets, so this can only
    overestimate the infimum over open supersets for the same candidates.
    """
    eps = _check_schedule(eps_schedule, "eps")
    if A.is_empty:
        return OuterEstimate(0.0, eps, [0.0] * len(eps), [], eps[-1], None)
    sweeps = [packing_sweep(A.neighborhood(e), premeasure, delta_schedule, strategy, exact_threshold, threads) for e in eps]
    per = [s.limit for s in sweeps]
    k = int(np.argmin(per))
    return OuterEstimate(per[k], eps, per, sweeps, eps[k], A.neighborhood(eps[k]))


@dataclass
class MethodIResult:
    estimate: float
    best_cover: int
    cover_values: list
    feasible: list
    best_single: float
    equals_single: bool


def method_I_wrap(A: CompactSet, open_value: Callable[[OpenSet], float], candidate_open_covers: Sequence[Sequence[OpenSet]],
                  sample_pitch: float = 1e-3) -> MethodIResult:
    """Minimum of ``sum hat(U_n)`` over the listed open covers of ``A``.

    Also reports the best single-set cover, which coincides with the minimum
    when ``hat`` is sub-additive on open sets.
    """
    pts = A.samples(sample_pitch)
    values, feasible = [], []
    cache: dict[int, float] = {}
    for cover in candidate_open_covers:
        inside = np.zeros(len(pts), dtype=bool)
        for U in cover:
            inside |= U.contains(pts)
        ok = bool(inside.all())
        feasible.append(ok)
        if not ok:
            values.append(math.inf)
            continue
        total = 0.0
        for U in cover:
            if id(U) not in cache:
                cache[id(U)] = open_value(U)
            total += cache[id(U)]
        values.append(total)
    if not any(feasible):
        return MethodIResult(math.nan, -1, values, feasible, math.nan, False)
    best = int(np.argmin(values))
    singles = [v for v, c, f in zip(values, candidate_open_covers, feasible) if f and len(c) == 1]
    best_single = min(singles) if singles else math.nan
    equals = bool(singles) and abs(best_single - values[best]) <= 1e-12
    return MethodIResult(values[best], best, values, feasible, best_single, equals)


# --- Taylor-Tricot comparison ----------------------------------------------


def t_packing_candidates(E: np.ndarray, delta: float, strategy: PackingStrategy | None = None) -> BallSet:
    st = strategy or PackingStrategy()
    E = np.atleast_2d(np.asarray(E, dtype=float))
    grid = _radius_grid(delta, st.radius_levels)
    iso = np.minimum(_isolating_radii(E), delta)
    radii = np.hstack([np.tile(grid, (len(E), 1)), iso[:, None]])
    return BallSet(np.repeat(E, radii.shape[1], axis=0), radii.ravel()).unique()


def t_packing_value(E, premeasure: PremeasureModel, delta: float, strategy: PackingStrategy | None = None,
                    exact_threshold: int = 40) -> PackingResult:
    """Best disjoint family of balls centred on ``E`` with radius <= delta (no containment)."""
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.size == 0:
        raise ValueError("E must be nonempty")
    cands = t_packing_candidates(E, delta, strategy)
    q = premeasure.values(cands.centers, cands.radii)
    idx, status, n_red = solve_packing(cands, q, exact_threshold)
    chosen = cands.take(idx) if idx else BallSet.empty(E.shape[1])
    checked = verify_packing(chosen)
    return PackingResult(chosen, math.fsum(q[i] for i in idx), status, checked, len(cands), n_red)


def tricot_value(E, premeasure, delta_schedule, strategy=None, exact_threshold: int = 40, partitions=None):
    """Method I over listed partitions of ``E`` applied to the packing premeasure.

    The packing premeasure of a piece is the infimum over the schedule of the
    T-packing supremum (nonincreasing in delta). Default partitions: ``E``
    whole and ``E`` split into singletons. Returns (value, per-partition values, all exact).
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    deltas = _check_schedule(delta_schedule, "delta")
    if partitions is None:
        partitions = [[list(range(len(E)))], [[i] for i in range(len(E))]]
    cache: dict[tuple, tuple[float, bool]] = {}

    def piece(idx):
        key = tuple(sorted(idx))
        if key not in cache:
            res = [t_packing_value(E[list(key)], premeasure, d, strategy, exact_threshold) for d in deltas]
            cache[key] = (min(r.value for r in res), all(r.solver_status == "exact" for r in res))
        return cache[key]

    totals = []
    exact = True
    for part in partitions:
        vals = [piece(p) for p in part]
        totals.append(math.fsum(v for v, _ in vals))
        exact &= all(e for _, e in vals)
    return min(totals), totals, exact


@dataclass
class ComparisonReport:
    hat: float
    tricot: float
    gap: float
    exact: bool
    partition_values: list


def compare_constructions(E, premeasure: PremeasureModel, eps_schedule, delta_schedule, strategy=None,
                          exact_threshold: int = 40, partitions=None) -> ComparisonReport:
    E = np.atleast_2d(np.asarray(E, dtype=float))
    hat = outer_regularize(CompactSet(points=[tuple(p) for p in E]), premeasure, eps_schedule, delta_schedule, strategy, exact_threshold)
    tv, per, exact = tricot_value(E, premeasure, delta_schedule, strategy, exact_threshold, partitions)
    return ComparisonReport(hat.value, tv, abs(hat.value - tv), exact and hat.all_exact, per)


# --- bound checks -------------------------------------------------------------


@dataclass
class SandwichReport:
    mu_A: float
    mu_U: float
    gamma: float
    C: float
    lower_bound: float
    estimate: float
    upper_bound: float
    tol: float
    certificate_passed: bool

    @property
    def passed(self) -> bool:
        return (
            self.certificate_passed
            and self.lower_bound - self.tol <= self.estimate <= self.upper_bound + self.tol
        )


def sandwich_check(A: CompactSet, mu: SignedMeasure, premeasure_cert: BoundCertificate, reference: ReferenceMeasure,
                   estimate: OuterEstimate) -> SandwichReport:
    """Check ``mu(A)/(gamma C) <= estimate <= C mu(U)`` for the open set that realised the estimate."""
    C, gamma = premeasure_cert.C, reference.gamma
    mu_A = A.mass(mu)
    mu_U = total_mass(mu, estimate.best_open_set) if estimate.best_open_set is not None else mu_A
    tol = 1e-9 + 1e-6 * abs(mu_U)
    return SandwichReport(mu_A, mu_U, gamma, C, mu_A / (gamma * C), estimate.value, C * mu_U, tol, premeasure_cert.passed)


@dataclass
class SignedPackingReport:
    plus: OuterEstimate
    minus: OuterEstimate
    tv_A: float
    gamma: float
    C: float
    lower_bound: float
    upper_bound: float
    tol: float

    @property
    def total(self) -> float:
        return self.plus.value + self.minus.value

    @property
    def passed(self) -> bool:
        return self.lower_bound - self.tol <= self.total <= self.upper_bound + self.tol


def signed_packing_reconstruct(mu: SignedMeasure, q_plus: PremeasureModel, q_minus: PremeasureModel, A: CompactSet,
                               eps_schedule, delta_schedule, gamma: float, C: float, strategy=None,
                               exact_threshold: int = 40) -> SignedPackingReport:
    """Packing estimates for both signed parts and the total-variation sandwich on ``A``."""
    plus = outer_regularize(A, q_plus, eps_schedule, delta_schedule, strategy, exact_threshold)
    minus = outer_regularize(A, q_minus, eps_schedule, delta_schedule, strategy, exact_threshold)
    tv = A.mass(total_variation(mu))
    tol = 1e-9 + 1e-6 * abs(tv)
    return SignedPackingReport(plus, minus, tv, gamma, C, tv / (gamma * C), C * tv, tol)
