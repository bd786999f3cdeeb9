import itertools
import math

import numpy as np
from hypothesis import given, strategies as st

from ballrecon import solvers


def _random_graph(rng, n, p):
    a = rng.random((n, n)) < p
    a = np.triu(a, 1)
    return a | a.T


def _brute_mwis(w, adj):
    best = 0.0
    n = len(w)
    for mask in range(1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if any(adj[i, j] for i, j in itertools.combinations(idx, 2)):
            continue
        best = max(best, sum(w[i] for i in idx))
    return best


@given(st.integers(0, 10**6), st.integers(1, 13), st.floats(0.05, 0.8))
def test_mwis_exact_matches_enumeration(seed, n, p):
    rng = np.random.default_rng(seed)
    adj = _random_graph(rng, n, p)
    w = rng.uniform(0.1, 2.0, n)
    sel = solvers.mwis_exact(w, adj)
    assert not any(adj[i, j] for i, j in itertools.combinations(sel, 2))
    assert math.isclose(sum(w[i] for i in sel), _brute_mwis(w, adj), rel_tol=0, abs_tol=1e-12)


def test_heuristic_path_returns_independent_sets(rng):
    adj = _random_graph(rng, 120, 0.05)
    w = rng.uniform(0.1, 1.0, 120)
    sel = solvers.max_weight_independent_set(w, adj, exact_threshold=5)
    assert sel.status in {"exact", "greedy", "improved"}
    assert not any(adj[i, j] for i, j in itertools.combinations(sel.indices, 2))
    greedy = solvers.mwis_greedy(w, adj)
    assert sel.value >= sum(w[i] for i in greedy) - 1e-12


def test_local_search_never_worsens(rng):
    adj = _random_graph(rng, 40, 0.15)
    w = rng.uniform(0.1, 1.0, 40)
    start = solvers.mwis_greedy(w, adj)
    better, _ = solvers.mwis_local_search(w, adj, start)
    assert sum(w[i] for i in better) >= sum(w[i] for i in start) - 1e-12
    assert not any(adj[i, j] for i, j in itertools.combinations(better, 2))


def test_nonpositive_weights_are_dropped():
    adj = np.zeros((3, 3), dtype=bool)
    sel = solvers.max_weight_independent_set([1.0, 0.0, -2.0], adj)
    assert sel.indices == [0] and sel.value == 1.0


def _brute_cover(masks, costs, n):
    full = (1 << n) - 1
    best = math.inf
    for k in range(1, len(masks) + 1):
        for sub in itertools.combinations(range(len(masks)), k):
            m = 0
            for i in sub:
                m |= masks[i]
            if m == full:
                best = min(best, sum(costs[i] for i in sub))
    return best


@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(1, 12))
def test_set_cover_exact_matches_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    masks = [int(rng.integers(1, 1 << n)) for _ in range(m)]
    costs = list(rng.uniform(0.0, 2.0, m))
    pick = solvers.set_cover_exact(masks, costs, n)
    want = _brute_cover(masks, costs, n)
    if math.isinf(want):
        assert pick is None
    else:
        assert math.isclose(sum(costs[i] for i in pick), want, abs_tol=1e-12)


def test_greedy_cover_is_feasible_and_pruning_keeps_feasibility(rng):
    n = 30
    masks = [int(rng.integers(1, 1 << n)) for _ in range(40)] + [1 << i for i in range(n)]
    costs = list(rng.uniform(0.1, 1.0, len(masks)))
    pick = solvers.set_cover_greedy(masks, costs, n)
    pruned = solvers.prune_redundant(masks, costs, pick, n)
    for sel in (pick, pruned):
        m = 0
        for i in sel:
            m |= masks[i]
        assert m == (1 << n) - 1


def test_clique_bounds_bracket_the_exact_clique(rng):
    adj = _random_graph(rng, 18, 0.6)
    lower, upper = solvers.clique_bounds(adj)
    exact = solvers.max_clique_exact(adj)
    assert len(lower) <= len(exact) <= upper
