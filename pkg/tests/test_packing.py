import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballrecon.measures import Lebesgue, ReferenceMeasure, SignedMeasure, total_mass
from ballrecon.metric import BallSet, Euclidean
from ballrecon.opensets import Neighborhood, OpenBall, OpenBox, Union
from ballrecon.packing import (
    CompactSet,
    PackingInstance,
    PackingStrategy,
    compare_constructions,
    dominance_reduce,
    generate_packing_candidates,
    max_packing_value,
    method_I_wrap,
    outer_regularize,
    packing_sweep,
    sandwich_check,
    signed_packing_reconstruct,
    t_packing_value,
    verify_packing,
)
from ballrecon.premeasures import Averaged, Exact, Noisy, SignedPart, certify_bounds, default_sample_spec

E2 = Euclidean(2)
EPS = (0.1, 0.05, 0.02)
DELTAS = (0.2, 0.1, 0.05, 0.02, 0.01)


def _enumerate(balls: BallSet, weights: np.ndarray) -> float:
    """Exhaustive oracle: best total weight over all pairwise disjoint subsets."""
    n = len(balls)
    conflict = balls.overlaps()
    nbr = [sum(1 << j for j in np.flatnonzero(conflict[i])) for i in range(n)]
    best = 0.0
    for mask in range(1 << n):
        ok, total, m = True, 0.0, mask
        while m:
            i = (m & -m).bit_length() - 1
            if nbr[i] & mask:
                ok = False
                break
            total += weights[i]
            m &= m - 1
        if ok:
            best = max(best, total)
    return best


def _atoms(rng, n, lo=0.0, hi=1.0):
    pos = rng.uniform(lo, hi, (n, 2))
    return SignedMeasure.from_data(E2, atoms=list(zip(map(tuple, pos), rng.uniform(0.1, 1.0, n))))


def test_exact_status_matches_enumeration(rng):
    U = OpenBox((-0.2, -0.2), (0.6, 0.6))
    for _ in range(15):
        mu = _atoms(rng, 3, 0.0, 0.4)
        q = Noisy(mu, 2.0, seed=int(rng.integers(100)))
        cands = generate_packing_candidates(U, 0.15, mu, PackingStrategy(lattice=False, radius_levels=3))
        idx = rng.choice(len(cands), size=min(len(cands), 18), replace=False)
        cands = cands.take(np.sort(idx))
        res = max_packing_value(PackingInstance(U, 0.15, cands, q), reduce=False)
        assert res.solver_status == "exact"
        assert abs(res.value - _enumerate(cands, q.values(cands.centers, cands.radii))) <= 1e-12
        reduced = max_packing_value(PackingInstance(U, 0.15, cands, q), reduce=True)
        assert abs(reduced.value - res.value) <= 1e-12


def test_dominance_reduction_preserves_the_optimum(rng):
    for _ in range(10):
        c = rng.uniform(0, 0.3, (16, 2))
        r = rng.uniform(0.01, 0.15, 16)
        balls = BallSet(c, r)
        w = rng.uniform(0.1, 1.0, 16)
        keep = dominance_reduce(balls, w)
        assert abs(_enumerate(balls.take(keep), w[keep]) - _enumerate(balls, w)) <= 1e-12


def test_candidates_contain_atom_centred_balls_and_respect_containment():
    mu = SignedMeasure.from_data(E2, atoms=[((0.3, 0.3), 1.0)])
    U = OpenBall((0.3, 0.3), 0.5)
    c = generate_packing_candidates(U, 0.05, mu)
    assert np.any(np.all(c.centers == [0.3, 0.3], axis=1))
    assert np.all(c.radii <= 0.05)
    assert np.all(U.holds_balls(c.centers, c.radii, 0.01 * c.radii))


def test_segment_neighbourhood_candidates_on_the_segment():
    mu = SignedMeasure.from_data(E2, chains=[([(0.0, 0.0), (1.0, 0.0)], 1.0)])
    U = Neighborhood(0.05, polylines=(np.array([[0.0, 0.0], [1.0, 0.0]]),))
    c = generate_packing_candidates(U, 0.02, mu, PackingStrategy(lattice=False))
    assert np.all(U.holds_balls(c.centers, c.radii, 0.01 * c.radii))
    for r in np.unique(c.radii):
        on = c.centers[(c.radii == r) & (c.centers[:, 1] == 0.0)][:, 0]
        gaps = np.diff(np.sort(on))
        # two interleaved rows of centres spaced just over 2r each
        assert len(on) > 1 and np.all(gaps > 0)


def test_empty_candidates_and_far_sets():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0)])
    res = max_packing_value(PackingInstance(OpenBall((0.0, 0.0), 1.0), 0.1, BallSet.empty(2), Averaged(mu)))
    assert res.value == 0.0
    far = packing_sweep(OpenBall((5.0, 5.0), 0.5), Averaged(mu), DELTAS)
    assert far.limit == 0.0


def test_single_dirac_is_recovered():
    mu = SignedMeasure.from_data(E2, atoms=[((0.3, 0.4), 1.0)])
    sw = packing_sweep(OpenBall((0.3, 0.4), 0.5), Averaged(mu), DELTAS)
    assert sw.all_exact and abs(sw.limit - 1.0) <= 1e-9
    est = outer_regularize(CompactSet(points=[(0.3, 0.4)]), Averaged(mu), EPS, DELTAS)
    assert all(abs(v - 1.0) <= 1e-9 for v in est.per_eps)


def test_ten_separated_atoms_sum_their_weights(rng):
    pos = np.array([[i, j] for i in range(5) for j in range(2)], dtype=float) * 1.3
    w = rng.uniform(0.1, 1.0, 10)
    mu = SignedMeasure.from_data(E2, atoms=list(zip(map(tuple, pos), w)))
    res = max_packing_value(PackingInstance(OpenBox((-1, -1), (7, 3)), 0.4,
                                            generate_packing_candidates(OpenBox((-1, -1), (7, 3)), 0.4, mu), Averaged(mu)))
    assert res.solver_status == "exact" and abs(res.value - w.sum()) <= 1e-12


@given(st.integers(0, 10**6))
def test_results_are_disjoint_contained_and_bounded(seed):
    rng = np.random.default_rng(seed)
    mu = _atoms(rng, 6)
    U = OpenBall(tuple(rng.uniform(0.2, 0.8, 2)), float(rng.uniform(0.2, 0.6)))
    q = Averaged(mu)
    cands = generate_packing_candidates(U, 0.1, mu)
    res = max_packing_value(PackingInstance(U, 0.1, cands, q))
    verify_packing(res.chosen, U, 0.01)
    # C = 1 upper bound: averaged values never exceed the ball mass
    assert res.value <= total_mass(mu, U) + 1e-12


def test_value_is_monotone_under_candidate_enlargement(rng):
    for _ in range(10):
        mu = _atoms(rng, 5)
        U = OpenBox((0, 0), (1, 1))
        q = Noisy(mu, 2.0, seed=3)
        full = generate_packing_candidates(U, 0.1, mu, PackingStrategy(lattice=False))
        part = full.take(np.sort(rng.choice(len(full), len(full) // 2, replace=False)))
        a = max_packing_value(PackingInstance(U, 0.1, part, q))
        b = max_packing_value(PackingInstance(U, 0.1, full, q))
        assert a.solver_status == b.solver_status == "exact"
        assert b.value >= a.value - 1e-12


def test_nested_candidates_make_sweeps_monotone(rng):
    mu = _atoms(rng, 8)
    sw = packing_sweep(OpenBox((0, 0), (1, 1)), Noisy(mu, 2.0, seed=1), DELTAS, PackingStrategy(nested=True))
    assert not sw.violations
    assert sw.limit == sw.values[-1]


def test_disjoint_open_sets_add_up(rng):
    mu = _atoms(rng, 8)
    q = Noisy(mu, 2.0, seed=5)
    U1, U2 = OpenBox((0.0, 0.0), (0.45, 1.0)), OpenBox((0.55, 0.0), (1.0, 1.0))
    st_ = PackingStrategy(nested=True)
    a = packing_sweep(U1, q, DELTAS, st_).limit
    b = packing_sweep(U2, q, DELTAS, st_).limit
    both = packing_sweep(Union((U1, U2)), q, DELTAS, st_).limit
    assert abs(both - (a + b)) <= 1e-12


def test_outer_regularisation_of_merged_neighbourhoods():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0), ((0.15, 0.0), 0.5)])
    A = CompactSet(points=[(0.0, 0.0), (0.15, 0.0)])
    joint = outer_regularize(A, Averaged(mu), (0.1,), DELTAS).value
    sep = sum(outer_regularize(CompactSet(points=[p]), Averaged(mu), (0.05,), DELTAS).value for p in A.points)
    assert abs(joint - sep) <= 1e-9 and abs(joint - 1.5) <= 1e-9


def test_set_away_from_the_support_has_zero_estimate():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0)])
    assert outer_regularize(CompactSet(points=[(1.0, 1.0)]), Averaged(mu), EPS, DELTAS).value == 0.0


def test_method_one_wrapper():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0), ((1.0, 0.0), 2.0)])
    q = Averaged(mu)
    A = CompactSet(points=[(0.0, 0.0), (1.0, 0.0)])

    def value(U):
        return packing_sweep(U, q, DELTAS).limit

    single = Union((OpenBall((0.0, 0.0), 0.1), OpenBall((1.0, 0.0), 0.1)))
    split = [OpenBall((0.0, 0.0), 0.1), OpenBall((1.0, 0.0), 0.1)]
    over = [OpenBall((0.0, 0.0), 0.2), OpenBall((0.0, 0.0), 0.1), OpenBall((1.0, 0.0), 0.3)]
    res = method_I_wrap(A, value, [[single], split, over, [OpenBall((0.0, 0.0), 0.5)]])
    assert res.feasible == [True, True, True, False]
    assert abs(res.cover_values[1] - 3.0) <= 1e-9 and abs(res.best_single - 3.0) <= 1e-9
    assert res.estimate >= res.best_single - 1e-12 and res.equals_single
    infeasible = method_I_wrap(A, value, [[OpenBall((5.0, 5.0), 0.1)]])
    assert math.isnan(infeasible.estimate)


def test_t_packings():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0), ((1.0, 0.0), 0.5)])
    q = Averaged(mu)
    assert abs(t_packing_value([(0.0, 0.0)], q, 0.3).value - 1.0) <= 1e-12
    assert abs(t_packing_value([(0.0, 0.0), (1.0, 0.0)], q, 0.3).value - 1.5) <= 1e-12
    assert t_packing_value([(3.0, 3.0)], q, 0.3).value == 0.0
    with pytest.raises(ValueError):
        t_packing_value(np.empty((0, 2)), q, 0.3)


def test_constructions_agree_on_atoms(rng):
    mu = SignedMeasure.from_data(E2, atoms=[((0.2, 0.2), 1.0), ((0.6, 0.7), 0.4), ((0.9, 0.1), 0.8)])
    rep = compare_constructions(np.array([[0.2, 0.2], [0.9, 0.1]]), Averaged(mu), EPS, DELTAS)
    assert rep.gap < 1e-9 and abs(rep.hat - 1.8) < 1e-9
    zero = compare_constructions(np.array([[2.0, 2.0]]), Averaged(mu), EPS, DELTAS)
    assert zero.hat == 0.0 and zero.tricot == 0.0


def test_sandwich_on_atoms():
    mu = SignedMeasure.from_data(E2, atoms=[((0.2, 0.2), 1.0), ((0.6, 0.7), 0.4)])
    q = Averaged(mu)
    cert = certify_bounds(q, mu, 0.5, 2.0, math.inf, default_sample_spec(mu))
    A = CompactSet(points=[(0.2, 0.2), (0.6, 0.7)])
    est = outer_regularize(A, q, EPS, DELTAS)
    rep = sandwich_check(A, mu, cert, ReferenceMeasure.build(Lebesgue(2), 0.5), est)
    assert rep.passed and abs(rep.estimate - 1.4) <= 1e-9
    assert abs(rep.lower_bound - 1.4 / 8) <= 1e-12


def test_signed_packing_of_two_atoms():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 2.0), ((1.0, 0.0), -1.0)])
    base = Averaged(mu)
    A = CompactSet(points=[(0.0, 0.0), (1.0, 0.0)])
    rep = signed_packing_reconstruct(mu, SignedPart(base, 1), SignedPart(base, -1), A, EPS, DELTAS, 4.0, 2.0)
    assert abs(rep.plus.value - 2.0) <= 1e-9 and abs(rep.minus.value - 1.0) <= 1e-9 and rep.passed


def test_nonnegative_measure_has_no_negative_part():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 1.0)])
    base = Averaged(mu)
    A = CompactSet(points=[(0.0, 0.0)])
    rep = signed_packing_reconstruct(mu, SignedPart(base, 1), SignedPart(base, -1), A, EPS, DELTAS, 4.0, 2.0)
    assert rep.minus.value == 0.0


def test_exact_premeasure_recovers_the_measure(rng):
    mu = _atoms(rng, 6)
    A = CompactSet(points=[tuple(p) for p in mu.atom_positions])
    est = outer_regularize(A, Exact(mu), EPS, DELTAS)
    assert abs(est.value - mu.atom_weights.sum()) <= 1e-9
