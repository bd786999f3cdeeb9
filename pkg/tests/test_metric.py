import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballrecon.metric import (
    Ball,
    BallSet,
    DirectionalProbeParams,
    DomainError,
    Euclidean,
    FiniteMetric,
    StarGraph,
    admissibility_matrix,
    directional_limited_probe,
    directional_witness_set,
    pair_admissible,
)


def test_euclidean_distance_and_space_check(plane):
    p, q = plane.point(0, 0), plane.point(3, 4)
    assert plane.distance(p, q) == 5.0
    with pytest.raises(DomainError):
        plane.distance(p, Euclidean(3).point(0, 0, 0))


def test_ball_requires_positive_radius(plane):
    with pytest.raises(DomainError):
        Ball(plane.point(0, 0), 0.0)


def test_star_graph_distances():
    g = StarGraph(4)
    assert g.distance(g.point(0, 1.0), g.point(0, 0.25)) == 0.75
    assert g.distance(g.point(0, 1.0), g.point(2, 0.5)) == 1.5
    assert g.distance(g.hub, g.point(3, 0.7)) == 0.7
    assert g.point(1, 0.0) == g.hub


def test_finite_metric_validation():
    FiniteMetric(np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]]))
    with pytest.raises(DomainError):
        FiniteMetric(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    with pytest.raises(DomainError):
        FiniteMetric(np.array([[0, 1], [2, 0]]))


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.05, 0.95))
def test_euclidean_witness_lies_on_segment(coords, frac):
    sp = Euclidean(2)
    a, b = sp.point(0, 0), sp.point(*coords[:2])
    dab = sp.distance(a, b)
    if dab < 1e-3:
        return
    c = sp.point(*(frac * b.array))
    (x,) = directional_witness_set(sp, a, c, b)
    assert abs(sp.distance(a, x) - sp.distance(a, c)) <= 1e-9
    assert abs(sp.distance(a, x) + sp.distance(x, b) - dab) <= 1e-9


def test_star_witness_walks_the_geodesic():
    g = StarGraph(3)
    a, b, c = g.point(0, 0.5), g.point(1, 1.0), g.point(2, 0.2)
    (x,) = directional_witness_set(g, a, c, b)
    assert abs(g.distance(a, x) - g.distance(a, c)) < 1e-12
    assert abs(g.distance(a, x) + g.distance(x, b) - g.distance(a, b)) < 1e-12


def test_finite_witnesses_enumerate_geodesic_nodes():
    # path 0-1-2 with a leaf 3 hanging off 1: nodes 1 and 3 are both at
    # distance 1 from 0, but only node 1 lies on the geodesic to 2
    m = np.array([[0, 1, 2, 2], [1, 0, 1, 1], [2, 1, 0, 2], [2, 1, 2, 0]], dtype=float)
    sp = FiniteMetric(m)
    xs = directional_witness_set(sp, sp.point(0), sp.point(1), sp.point(2))
    assert [x.coords[0] for x in xs] == [1]
    xs = directional_witness_set(sp, sp.point(0), sp.point(3), sp.point(2))
    assert [x.coords[0] for x in xs] == [2]


def test_probe_params_validate_eta(plane):
    with pytest.raises(DomainError):
        DirectionalProbeParams(1.0, 0.5, (plane.point(0.1, 0),), plane.point(0, 0))


def _brute_force_clique(adj):
    n = len(adj)
    for size in range(n, 0, -1):
        for sub in itertools.combinations(range(n), size):
            if all(adj[i, j] for i, j in itertools.combinations(sub, 2)):
                return size
    return 0


def test_probe_matches_subset_enumeration(rng, plane):
    for _ in range(10):
        pts = rng.uniform(-0.4, 0.4, size=(11, 2))
        cands = [plane.point(*p) for p in pts if 0 < np.linalg.norm(p) < 1]
        res = directional_limited_probe(plane, DirectionalProbeParams(1.0, 1 / 3, cands, plane.point(0, 0)))
        adj = admissibility_matrix(plane, plane.point(0, 0), cands, 1 / 3)
        assert res.exact and res.max_card == _brute_force_clique(adj)
        sub = res.witness_subset
        assert all(pair_admissible(plane, plane.point(0, 0), p, q, 1 / 3) for p, q in itertools.combinations(sub, 2))


def test_euclidean_matrix_agrees_with_pairwise_definition(rng, plane):
    a = plane.point(0.1, -0.2)
    cands = [plane.point(*(a.array + v)) for v in rng.uniform(-0.5, 0.5, (12, 2))]
    fast = admissibility_matrix(plane, a, cands, 0.3)
    for i, j in itertools.combinations(range(len(cands)), 2):
        assert fast[i, j] == pair_admissible(plane, a, cands[i], cands[j], 0.3)


@pytest.mark.parametrize("k", [5, 10])
def test_star_graph_hub_probe(k):
    g = StarGraph(k)
    cands = [g.point(i, 0.5) for i in range(k)]
    res = directional_limited_probe(g, DirectionalProbeParams(1.0, 1 / 3, cands, g.hub))
    assert res.max_card == k and res.exact


def test_probe_rejects_points_outside_the_ball(plane):
    with pytest.raises(DomainError):
        directional_limited_probe(plane, DirectionalProbeParams(0.5, 0.2, (plane.point(1, 0),), plane.point(0, 0)))


def test_ballset_overlaps_treat_tangency_as_overlap():
    bs = BallSet(np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 0.0]]), np.array([1.0, 1.0, 1.0]))
    ov = bs.overlaps()
    assert ov[0, 1] and not ov[0, 2] and not ov[1, 2]


def test_ballset_covers_closed_balls():
    bs = BallSet(np.array([[0.0, 0.0]]), np.array([1.0]))
    assert bs.covers(np.array([[1.0, 0.0], [1.1, 0.0]])).tolist() == [[True, False]]
