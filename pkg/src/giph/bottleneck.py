"""Bottleneck distance between degree-0 persistence diagrams.

Finite points are matched to finite points or to the diagonal under the
max-norm; essential points are matched only among themselves. The finite
part is solved exactly: binary search over the candidate costs with a
Hopcroft-Karp perfect-matching test at each candidate.
"""
from __future__ import annotations

import itertools
import math

import numba
import numpy as np

from .persistence import PersistenceDiagram

_INF = np.iinfo(np.int64).max


@numba.njit(cache=True)
def _augment(root, adj, match_l, match_r, dist, it, stack, via):
    nr = adj.shape[1]
    depth = 0
    stack[0] = root
    while depth >= 0:
        u = stack[depth]
        advanced = False
        while it[u] < nr:
            v = it[u]
            it[u] += 1
            if not adj[u, v]:
                continue
            w = match_r[v]
            if w < 0:
                via[depth] = v
                for d in range(depth + 1):
                    match_l[stack[d]] = via[d]
                    match_r[via[d]] = stack[d]
                return True
            if dist[w] == dist[u] + 1:
                via[depth] = v
                depth += 1
                stack[depth] = w
                advanced = True
                break
        if not advanced:
            dist[u] = _INF
            depth -= 1
    return False


@numba.njit(cache=True)
def hopcroft_karp(adj):
    """Size of a maximum matching in the bipartite graph with biadjacency ``adj``."""
    nl, nr = adj.shape
    match_l = np.full(nl, -1, np.int64)
    match_r = np.full(nr, -1, np.int64)
    dist = np.empty(nl, np.int64)
    it = np.empty(nl, np.int64)
    queue = np.empty(nl, np.int64)
    stack = np.empty(nl + 1, np.int64)
    via = np.empty(nl + 1, np.int64)
    size = 0
    while True:
        qh = 0
        qt = 0
        for u in range(nl):
            if match_l[u] < 0:
                dist[u] = 0
                queue[qt] = u
                qt += 1
            else:
                dist[u] = _INF
        found = False
        while qh < qt:
            u = queue[qh]
            qh += 1
            for v in range(nr):
                if adj[u, v]:
                    w = match_r[v]
                    if w < 0:
                        found = True
                    elif dist[w] == _INF:
                        dist[w] = dist[u] + 1
                        queue[qt] = w
                        qt += 1
        if not found:
            break
        it[:] = 0
        for u in range(nl):
            if match_l[u] < 0 and dist[u] == 0:
                if _augment(u, adj, match_l, match_r, dist, it, stack, via):
                    size += 1
    return size


@numba.njit(cache=True)
def _feasible(cost, pa, pb, t):
    # left: A then diagonal copies of B; right: B then diagonal copies of A
    n = pa.shape[0]
    m = pb.shape[0]
    adj = np.zeros((n + m, n + m), np.bool_)
    for i in range(n):
        for j in range(m):
            adj[i, j] = cost[i, j] <= t
        adj[i, m + i] = pa[i] <= t
    for j in range(m):
        adj[n + j, j] = pb[j] <= t
        for i in range(n):
            adj[n + j, m + i] = True
    return hopcroft_karp(adj) == n + m


@numba.njit(cache=True)
def _finite_bottleneck(a, b, lower):
    n = a.shape[0]
    m = b.shape[0]
    if n + m == 0:
        return lower
    pa = (a[:, 1] - a[:, 0]) / 2.0
    pb = (b[:, 1] - b[:, 0]) / 2.0
    upper = 0.0
    for i in range(n):
        upper = max(upper, pa[i])
    for j in range(m):
        upper = max(upper, pb[j])
    if upper <= lower:
        return lower
    cost = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            cost[i, j] = max(abs(a[i, 0] - b[j, 0]), abs(a[i, 1] - b[j, 1]))
    if _feasible(cost, pa, pb, lower):
        return lower
    cands = np.unique(np.concatenate((cost.ravel(), pa, pb)))
    cands = cands[(cands > lower) & (cands <= upper)]
    lo = 0
    hi = cands.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, pa, pb, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exact bottleneck distance; ``inf`` when the essential counts differ."""
    if d1.degree != d2.degree:
        raise ValueError(f"degree mismatch: {d1.degree} vs {d2.degree}")
    e1, e2 = np.sort(d1.essential), np.sort(d2.essential)
    if e1.size != e2.size:
        return math.inf
    # sorted order is an optimal bottleneck matching on the line
    ess = float(np.max(np.abs(e1 - e2))) if e1.size else 0.0
    return float(_finite_bottleneck(d1.finite, d2.finite, ess))


ORACLE_MAX_POINTS = 8


def bottleneck_oracle(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Bottleneck distance by exhaustive search over all matchings.

    Every finite point of ``d1`` is tried against every unused finite point of
    ``d2`` and the diagonal; essential points are tried in every permutation.
    Branches already worse than the best complete matching are cut, which
    keeps the search exact. Limited to ``ORACLE_MAX_POINTS`` points per diagram.
    """
    if len(d1) > ORACLE_MAX_POINTS or len(d2) > ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_POINTS} points per diagram")
    if d1.degree != d2.degree:
        raise ValueError("degree mismatch")
    e1, e2 = list(d1.essential), list(d2.essential)
    if len(e1) != len(e2):
        return math.inf
    ess = min(
        (max((abs(x - y) for x, y in zip(e1, perm)), default=0.0) for perm in itertools.permutations(e2)),
        default=0.0,
    )

    a = [tuple(p) for p in d1.finite]
    b = [tuple(p) for p in d2.finite]
    best = [math.inf]

    def diag(p):
        return (p[1] - p[0]) / 2

    def search(i, used, worst):
        if worst >= best[0]:
            return
        if i == len(a):
            rest = max((diag(b[j]) for j in range(len(b)) if j not in used), default=0.0)
            best[0] = min(best[0], max(worst, rest))
            return
        p = a[i]
        search(i + 1, used, max(worst, diag(p)))
        for j, q in enumerate(b):
            if j not in used:
                c = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
                search(i + 1, used | {j}, max(worst, c))

    search(0, frozenset(), 0.0)
    return max(ess, best[0])
