"""RC-tree tracing dendrogram builder.

After contracting the tree, each edge walks up the RC-tree from the parent of
its own rcnode and stops at the first ancestor whose edge outranks it (or at
the root). All edges stopping at the same rcnode lie on one spine: sorting
that bucket by rank and chaining it, with the rcnode's own edge on top, gives
their parents.
"""

from __future__ import annotations

import time

import numba
import numpy as np
from numba import njit, prange

from .contraction import RCTree, contract
from .core import ROOT, Dendrogram, RankOrder, WeightedTree
from .parallel import atomic_add, sort_by_rank


def rctt_build(
    t: WeightedTree,
    r: RankOrder,
    seed: int = 0,
    rct: RCTree | None = None,
    stats: dict | None = None,
) -> Dendrogram:
    """Build the dendrogram by tracing edges up the RC-tree.

    ``stats`` (optional dict) receives ``phases`` (build / trace / sort
    seconds), ``counters`` (trace lengths, rounds, RC-tree height) and the
    ``protect_site`` array mapping each edge to the rcnode it was bucketed at.
    """
    t0 = time.perf_counter()
    if rct is None:
        rct = contract(t, r, seed)
    t1 = time.perf_counter()
    serial = numba.get_num_threads() == 1
    count = np.zeros(rct.n, np.int64)
    site, steps, start, items = _trace_all(r.rank, rct.parent, rct.edge, rct.vertex_of_edge(), count, not serial)
    t2 = time.perf_counter()
    if serial:
        # scattering edges in rank order leaves every bucket already sorted
        items = _scatter_sorted(site, start, r.order)
        parent = _chain(rct.edge, rct.parent, start, items)
    else:
        parent = _finalize(r.rank, rct.edge, rct.parent, start, items)
    t3 = time.perf_counter()
    if stats is not None:
        stats.setdefault("phases", {}).update({"build": t1 - t0, "trace": t2 - t1, "sort": t3 - t2})
        stats.setdefault("counters", {}).update(
            {
                "rounds": rct.rounds,
                "rct_height": rct.height(),
                "trace_max": int(steps.max()) if steps.size else 0,
                "trace_total": int(steps.sum()),
                "max_bucket": int(np.diff(start).max()) if start.size > 1 else 0,
            }
        )
        stats["protect_site"] = site
    return Dendrogram(parent)


def trace_edge(rct: RCTree, e: int, r: RankOrder) -> int:
    """Rcnode at which edge ``e`` is protected."""
    rank = r.rank
    x = int(np.flatnonzero(rct.edge == e)[0])
    y = int(rct.parent[x])
    while rct.parent[y] != -1 and rank[rct.edge[y]] < rank[e]:
        y = int(rct.parent[y])
    return y


def bucket_finalize(buckets: dict[int, list[int]], rct: RCTree, r: RankOrder) -> Dendrogram:
    """Sort and chain each rcnode's bucket under that rcnode's edge."""
    parent = np.full(rct.n - 1, ROOT, np.int64)
    rank = r.rank
    for y, bkt in buckets.items():
        s = sorted(bkt, key=lambda e: rank[e])
        for a, b in zip(s, s[1:]):
            parent[a] = b
        if s:
            parent[s[-1]] = ROOT if rct.parent[y] == -1 else rct.edge[y]
    return Dendrogram(parent)


@njit(cache=True, parallel=True)
def _trace_all(rank, rc_parent, rc_edge, vertex_of_edge, count, scatter):
    # count must come from the caller: numba does not see the atomic writes
    # and may forward stale values of arrays allocated in here
    m = vertex_of_edge.size
    n = rc_parent.size
    site = np.empty(m, np.int64)
    steps = np.zeros(m, np.int64)
    for e in prange(m):
        y = rc_parent[vertex_of_edge[e]]
        k = 1
        re = rank[e]
        while rc_parent[y] != -1 and rank[rc_edge[y]] < re:
            y = rc_parent[y]
            k += 1
        site[e] = y
        steps[e] = k
        atomic_add(count, y, 1)
    start = np.zeros(n + 1, np.int64)
    for y in range(n):
        start[y + 1] = start[y] + count[y]
    items = np.empty(m if scatter else 0, np.int64)
    if scatter:
        cursor = start[:-1].copy()
        for e in prange(m):
            items[atomic_add(cursor, site[e], 1)] = e
    return site, steps, start, items


@njit(cache=True)
def _scatter_sorted(site, start, order):
    cursor = start[:-1].copy()
    items = np.empty(order.size, np.int64)
    for e in order:
        y = site[e]
        items[cursor[y]] = e
        cursor[y] += 1
    return items


@njit(cache=True)
def _chain(rc_edge, rc_parent, start, items):
    parent = np.empty(items.size, np.int64)
    for y in range(rc_parent.size):
        a = start[y]
        b = start[y + 1]
        if a == b:
            continue
        for j in range(a, b - 1):
            parent[items[j]] = items[j + 1]
        parent[items[b - 1]] = ROOT if rc_parent[y] == -1 else rc_edge[y]
    return parent


@njit(cache=True, parallel=True)
def _finalize(rank, rc_edge, rc_parent, start, items):
    m = items.size
    n = rc_parent.size
    parent = np.full(m, ROOT, np.int64)
    for y in prange(n):
        a = start[y]
        b = start[y + 1]
        if a == b:
            continue
        s = sort_by_rank(items[a:b], rank)
        for j in range(b - a - 1):
            parent[s[j]] = s[j + 1]
        parent[s[b - a - 1]] = ROOT if rc_parent[y] == -1 else rc_edge[y]
    return parent
