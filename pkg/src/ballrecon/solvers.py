"""Combinatorial engines shared by the covering, packing and probe code.

* maximum-weight independent set on a conflict graph (packings),
* minimum-weight set cover over bitmask coverage (coverings),
* maximum clique with certified bounds (directional probe).

Graphs are dense boolean adjacency matrices; exact searches work on Python
integer bitmasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components


@dataclass
class Selection:
    indices: list[int]
    value: float
    status: str  # "exact", "greedy", "improved" or "infeasible"


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _adjacency_masks(adj: np.ndarray) -> list[int]:
    masks = []
    for row in adj:
        m = 0
        for j in np.flatnonzero(row):
            m |= 1 << int(j)
        masks.append(m)
    return masks


def mwis_exact(weights: Sequence[float], adj: np.ndarray) -> list[int]:
    """Maximum-weight independent set by branch and bound.

    The bound partitions the remaining candidates greedily into cliques and
    sums the heaviest weight of each clique. Vertices are explored in
    descending weight order so the first leaves are already good incumbents.
    """
    n = len(weights)
    if n == 0:
        return []
    order = sorted(range(n), key=lambda i: (-weights[i], i))
    w = [float(weights[i]) for i in order]
    sub = adj[np.ix_(order, order)]
    nbr = _adjacency_masks(sub)

    best_val = -1.0
    best_set: list[int] = []

    def bound(cand: int) -> float:
        total = 0.0
        while cand:
            v = (cand & -cand).bit_length() - 1  # heaviest remaining
            total += w[v]
            clique = 1 << v
            common = cand & nbr[v]
            while common:
                u = (common & -common).bit_length() - 1
                clique |= 1 << u
                common &= nbr[u]
            cand &= ~clique
        return total

    def expand(cand: int, value: float, chosen: list[int]) -> None:
        nonlocal best_val, best_set
        if cand == 0:
            if value > best_val:
                best_val, best_set = value, list(chosen)
            return
        if value + bound(cand) <= best_val:
            return
        v = (cand & -cand).bit_length() - 1
        chosen.append(v)
        expand(cand & ~nbr[v] & ~(1 << v), value + w[v], chosen)
        chosen.pop()
        expand(cand & ~(1 << v), value, chosen)

    expand((1 << n) - 1, 0.0, [])
    return sorted(order[i] for i in best_set)


def mwis_greedy(weights: Sequence[float], adj: np.ndarray) -> list[int]:
    taken = np.zeros(len(weights), dtype=bool)
    blocked = np.zeros(len(weights), dtype=bool)
    for i in sorted(range(len(weights)), key=lambda i: (-weights[i], i)):
        if not blocked[i]:
            taken[i] = True
            blocked |= adj[i]
            blocked[i] = True
    return [int(i) for i in np.flatnonzero(taken)]


def mwis_local_search(weights: Sequence[float], adj: np.ndarray, start: list[int], max_rounds: int = 200) -> tuple[list[int], bool]:
    """Improve an independent set by free insertions and 1-out/2-in swaps."""
    w = np.asarray(weights, dtype=float)
    n = len(w)
    chosen = np.zeros(n, dtype=bool)
    chosen[start] = True
    A = adj.astype(np.int32)
    improved = False
    for _ in range(max_rounds):
        hits = A[:, chosen].sum(axis=1) if chosen.any() else np.zeros(n, dtype=np.int32)
        free = np.flatnonzero(~chosen & (hits == 0) & (w > 0))
        if free.size:
            # insert the heaviest free vertex; others are reconsidered next round
            v = free[np.lexsort((free, -w[free]))[0]]
            chosen[v] = True
            improved = True
            continue
        best_gain, best_move = 1e-15, None
        for v in np.flatnonzero(chosen):
            pool = np.flatnonzero(~chosen & (hits == 1) & adj[:, v])
            if pool.size == 0:
                continue
            pool = pool[np.lexsort((pool, -w[pool]))]
            if w[pool[0]] - w[v] > best_gain:
                best_gain, best_move = w[pool[0]] - w[v], (v, pool[0], None)
            for a_i in range(len(pool)):
                a = pool[a_i]
                if w[a] + w[pool[a_i + 1] if a_i + 1 < len(pool) else a] - w[v] <= best_gain:
                    break
                for b in pool[a_i + 1:]:
                    gain = w[a] + w[b] - w[v]
                    if gain <= best_gain:
                        break
                    if not adj[a, b]:
                        best_gain, best_move = gain, (v, a, b)
                        break
        if best_move is None:
            break
        v, a, b = best_move
        chosen[v] = False
        chosen[a] = True
        if b is not None:
            chosen[b] = True
        improved = True
    return [int(i) for i in np.flatnonzero(chosen)], improved


def components(adj: np.ndarray) -> list[np.ndarray]:
    if len(adj) == 0:
        return []
    count, labels = connected_components(csr_matrix(adj), directed=False)
    return [np.flatnonzero(labels == k) for k in range(count)]


def max_weight_independent_set(weights: Sequence[float], adj: np.ndarray, exact_threshold: int = 40) -> Selection:
    """Solve each connected component exactly when small enough, else greedily.

    Vertices of nonpositive weight never improve a packing and are dropped.
    The status is ``exact`` only if every component was solved exactly.
    """
    w = np.asarray(weights, dtype=float)
    keep = np.flatnonzero(w > 0)
    if keep.size == 0:
        return Selection([], 0.0, "exact")
    sub = adj[np.ix_(keep, keep)]
    chosen: list[int] = []
    status = "exact"
    for comp in components(sub):
        cw = w[keep[comp]]
        cadj = sub[np.ix_(comp, comp)]
        if len(comp) <= exact_threshold:
            pick = mwis_exact(cw, cadj)
        else:
            pick = mwis_greedy(cw, cadj)
            pick, changed = mwis_local_search(cw, cadj, pick)
            status = "improved" if changed or status == "improved" else "greedy"
        chosen.extend(int(keep[comp[i]]) for i in pick)
    chosen.sort()
    return Selection(chosen, float(sum(w[i] for i in chosen)), status)


# --- set cover -------------------------------------------------------------


def _reduce_sets(masks: Sequence[int], costs: Sequence[float]) -> list[int]:
    """Indices of sets that survive removal of empty, duplicate and dominated sets."""
    best_for_mask: dict[int, int] = {}
    for i, (m, c) in enumerate(zip(masks, costs)):
        if m == 0:
            continue
        j = best_for_mask.get(m)
        if j is None or c < costs[j]:
            best_for_mask[m] = i
    alive = sorted(best_for_mask.values(), key=lambda i: (-bin(masks[i]).count("1"), costs[i], i))
    kept: list[int] = []
    for i in alive:
        if any((masks[i] & ~masks[j]) == 0 and costs[j] <= costs[i] for j in kept):
            continue
        kept.append(i)
    return sorted(kept)


def set_cover_exact(masks: Sequence[int], costs: Sequence[float], n_elements: int) -> list[int] | None:
    """Minimum-cost cover of ``n_elements`` by bitmask sets, or None if infeasible."""
    full = (1 << n_elements) - 1
    if full == 0:
        return []
    idx = _reduce_sets(masks, costs)
    union = 0
    for i in idx:
        union |= masks[i]
    if union & full != full:
        return None
    covering = {e: sorted((i for i in idx if masks[i] >> e & 1), key=lambda i: (costs[i], i)) for e in range(n_elements)}
    min_cost = {e: costs[covering[e][0]] for e in range(n_elements)}

    greedy = set_cover_greedy(masks, costs, n_elements)
    best_cost = math.fsum(costs[i] for i in greedy) if greedy is not None else math.inf
    best = list(greedy) if greedy is not None else None

    def rec(uncovered: int, cost: float, chosen: list[int]) -> None:
        nonlocal best_cost, best
        if uncovered == 0:
            if cost < best_cost:
                best_cost, best = cost, list(chosen)
            return
        lb = max(min_cost[e] for e in _bits(uncovered))
        if cost + lb >= best_cost:
            return
        e = min(_bits(uncovered), key=lambda e: (len(covering[e]), e))
        for i in covering[e]:
            if cost + costs[i] >= best_cost:
                break
            chosen.append(i)
            rec(uncovered & ~masks[i], cost + costs[i], chosen)
            chosen.pop()

    rec(full, 0.0, [])
    return sorted(best) if best is not None else None


def set_cover_greedy(masks: Sequence[int], costs: Sequence[float], n_elements: int, tiebreak: Sequence | None = None) -> list[int] | None:
    """Weighted greedy: repeatedly take the lowest cost per newly covered element."""
    full = (1 << n_elements) - 1
    key = tiebreak if tiebreak is not None else list(range(len(masks)))
    uncovered = full
    chosen: list[int] = []
    while uncovered:
        best_i, best_key = None, None
        for i, m in enumerate(masks):
            gain = bin(m & uncovered).count("1")
            if gain == 0:
                continue
            k = (costs[i] / gain, key[i])
            if best_key is None or k < best_key:
                best_i, best_key = i, k
        if best_i is None:
            return None
        chosen.append(best_i)
        uncovered &= ~masks[best_i]
    return chosen


def prune_redundant(masks: Sequence[int], costs: Sequence[float], chosen: list[int], n_elements: int) -> list[int]:
    """Drop chosen sets whose elements stay covered without them, costliest first."""
    full = (1 << n_elements) - 1
    out = list(chosen)
    for i in sorted(chosen, key=lambda i: (-costs[i], i)):
        rest = 0
        for j in out:
            if j != i:
                rest |= masks[j]
        if rest & full == full:
            out.remove(i)
    return out


# --- cliques ---------------------------------------------------------------


def max_clique_exact(adj: np.ndarray) -> list[int]:
    """Maximum clique as a maximum independent set of the complement."""
    comp = ~adj
    np.fill_diagonal(comp, False)
    return mwis_exact([1.0] * len(adj), comp)


def greedy_clique(adj: np.ndarray, starts: int = 32) -> list[int]:
    n = len(adj)
    deg = adj.sum(axis=1)
    order = sorted(range(n), key=lambda i: (-deg[i], i))
    best: list[int] = []
    for s in order[:starts]:
        clique = [s]
        alive = adj[s].copy()
        for v in order:
            if alive[v]:
                clique.append(v)
                alive &= adj[v]
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def clique_bounds(adj: np.ndarray) -> tuple[list[int], int]:
    """Greedy clique and an upper bound on the clique number.

    The upper bound is the independence number bound of the complement
    (conflict) graph: the LP relaxation with one constraint per greedily
    grown conflict clique, floored, capped by the greedy clique cover size.
    """
    n = len(adj)
    lower = greedy_clique(adj)
    conflict = ~adj
    np.fill_diagonal(conflict, False)
    cf = conflict.astype(np.float32)
    common = cf @ cf

    cliques: set[tuple[int, ...]] = set()
    for v in range(n):
        nbrs = np.flatnonzero(conflict[v])
        nbrs = nbrs[np.lexsort((nbrs, -common[v, nbrs]))]
        clique = [v]
        alive = conflict[v].copy()
        for u in nbrs:
            if alive[u]:
                clique.append(int(u))
                alive &= conflict[u]
        cliques.add(tuple(sorted(clique)))

    # clique cover of the conflict graph
    uncovered = np.ones(n, dtype=bool)
    cover = 0
    for v in range(n):
        if uncovered[v]:
            cover += 1
            alive = conflict[v] & uncovered
            uncovered[v] = False
            for u in np.flatnonzero(alive):
                if alive[u]:
                    uncovered[u] = False
                    alive &= conflict[u]

    rows, cols = [], []
    for r, clique in enumerate(sorted(cliques)):
        rows.extend([r] * len(clique))
        cols.extend(clique)
    A = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(cliques), n)).tocsr()
    res = linprog(-np.ones(n), A_ub=A, b_ub=np.ones(len(cliques)), bounds=(0, 1), method="highs")
    lp = math.floor(-res.fun + 1e-7) if res.status == 0 else n
    return lower, int(min(cover, lp, n))
