"""Tree-contraction dendrogram builder with per-cluster spine heaps.

Every cluster keeps a binomial heap of edges on one spine of its partial
dendrogram that have not been given their final parent yet. When vertex ``x``
contracts along edge ``e`` into ``y``:

1. ``S, H_x' = filter_and_insert(H_x, e)``: everything ranked below ``e``
   leaves the heap;
2. ``S`` is sorted and chained, its last element gets parent ``e``;
3. ``H_x'`` is melded into ``H_y`` (several clusters landing on ``y`` in the
   same step are melded together first by a balanced reduce).

Once one cluster remains, its heap is sorted and chained up to the root.
Each output slot is written exactly once.

The numba driver :func:`tc_build` runs each contraction phase as two parallel
passes: filter/sort/chain per event, then meld-reduce per target.
:class:`TCState` exposes the same steps on :class:`~sldkit.heap.EdgeHeap`
handles for small hand-driven runs.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit, prange

from .contraction import ROOT_KIND, RCTree, contract
from .core import ROOT, Dendrogram, RankOrder, WeightedTree
from .heap import (
    EdgeHeap,
    HeapPool,
    filter_and_insert,
    hp_collect,
    hp_filter_and_insert,
    hp_meld,
    meld,
)
from .parallel import counted_sort_by_rank


def tc_build(
    t: WeightedTree,
    r: RankOrder,
    seed: int = 0,
    rct: RCTree | None = None,
    stats: dict | None = None,
) -> Dendrogram:
    """Build the dendrogram by tree contraction.

    Parameters
    ----------
    t, r : the tree and its rank order.
    seed : contraction seed, ignored when ``rct`` is given.
    rct : reuse an existing contraction schedule.
    stats : if a dict is passed it receives ``phases`` (seconds) and
        ``counters`` (comparisons, max heap size, rounds), plus the arrays
        ``filter_site`` (rcnode whose edge protected each edge) and
        ``writes`` (output writes per edge).
    """
    t0 = time.perf_counter()
    if rct is None:
        rct = contract(t, r, seed)
    t1 = time.perf_counter()
    ev, ph_start, grp_start, ph_grp = _schedule(rct, r)
    collect = stats is not None
    parent, site, writes, ncmp, maxsize = _tc(
        t.n, t.m, r.rank, rct.parent, rct.edge, rct.root, ev, ph_start, grp_start, ph_grp, collect
    )
    t2 = time.perf_counter()
    if stats is not None:
        stats.setdefault("phases", {}).update({"build": t1 - t0, "merge": t2 - t1})
        stats.setdefault("counters", {}).update(
            {"comparisons": int(ncmp), "max_heap_size": int(maxsize), "rounds": rct.rounds}
        )
        stats["filter_site"] = site
        stats["writes"] = writes
    return Dendrogram(parent)


def _schedule(rct: RCTree, r: RankOrder):
    """Order contraction events by (phase, target, edge rank) and cut offsets."""
    phase = rct.phase()
    nonroot = np.flatnonzero(rct.kind != ROOT_KIND)
    ph = phase[nonroot]
    tgt = rct.parent[nonroot]
    ev = nonroot[np.lexsort((r.rank[rct.edge[nonroot]], tgt, ph))]
    ph = phase[ev]
    tgt = rct.parent[ev]
    k = ev.size
    if k == 0:
        z = np.zeros(1, np.int64)
        return ev.astype(np.int64), z, z, z
    new_ph = np.ones(k, np.bool_)
    new_ph[1:] = ph[1:] != ph[:-1]
    new_grp = new_ph.copy()
    new_grp[1:] |= tgt[1:] != tgt[:-1]
    ph_start = np.append(np.flatnonzero(new_ph), k).astype(np.int64)
    grp_idx = np.flatnonzero(new_grp)
    grp_start = np.append(grp_idx, k).astype(np.int64)
    # first group of every phase
    ph_grp = np.searchsorted(grp_idx, ph_start).astype(np.int64)
    return ev.astype(np.int64), ph_start, grp_start, ph_grp


@njit(cache=True, parallel=True)
def _tc(n, m, rank, rc_parent, rc_edge, root, ev, ph_start, grp_start, ph_grp, collect):
    parent = np.full(m, ROOT, np.int64)
    site = np.full(m if collect else 0, -1, np.int64)
    writes = np.zeros(m if collect else 0, np.int32)
    hh = np.full(n, -1, np.int64)
    hs = np.zeros(n, np.int64)
    child = np.full(m, -1, np.int64)
    sibling = np.full(m, -1, np.int64)
    order = np.zeros(m, np.int64)
    buf = np.empty(m + ev.size, np.int64)
    offs = np.zeros(ev.size + 1, np.int64)
    evh = np.full(ev.size, -1, np.int64)
    evs = np.zeros(ev.size, np.int64)
    evcmp = np.zeros(ev.size, np.int64)
    ngrp = grp_start.size - 1
    grpcmp = np.zeros(max(ngrp, 0), np.int64)
    grpmax = np.zeros(max(ngrp, 0), np.int64)

    nph = ph_start.size - 1
    for p in range(nph):
        a = ph_start[p]
        b = ph_start[p + 1]
        offs[a] = 0
        for i in range(a, b):
            offs[i + 1] = offs[i] + hs[ev[i]] + 1
        # filter, sort and chain every event of the phase
        for i in prange(a, b):
            x = ev[i]
            e = rc_edge[x]
            out = buf[offs[i] : offs[i + 1]]
            h, k, c1 = hp_filter_and_insert(hh[x], hs[x], e, rank, child, sibling, order, out)
            evh[i] = h
            evs[i] = hs[x] + 1 - k
            srt, c2 = counted_sort_by_rank(out[:k], rank)
            evcmp[i] = c1 + c2
            for j in range(k):
                s = srt[j]
                parent[s] = srt[j + 1] if j + 1 < k else e
                if collect:
                    site[s] = x
                    writes[s] += 1
            hh[x] = -1
            hs[x] = 0
        # balanced meld-reduce per target, then into the target's heap
        for g in prange(ph_grp[p], ph_grp[p + 1]):
            lo = grp_start[g]
            hi = grp_start[g + 1]
            c = 0
            width = 1
            while lo + width < hi:
                for j in range(lo, hi - width, 2 * width):
                    h, k = hp_meld(evh[j], evh[j + width], rank, child, sibling, order)
                    evh[j] = h
                    evs[j] += evs[j + width]
                    c += k
                width *= 2
            y = rc_parent[ev[lo]]
            h, k = hp_meld(hh[y], evh[lo], rank, child, sibling, order)
            hh[y] = h
            hs[y] += evs[lo]
            grpcmp[g] = c + k
            grpmax[g] = hs[y]

    # single cluster left: sort and chain its heap
    k = hp_collect(hh[root], hs[root], child, sibling, buf)
    srt, c3 = counted_sort_by_rank(buf[:k], rank)
    for j in range(k):
        s = srt[j]
        parent[s] = srt[j + 1] if j + 1 < k else ROOT
        if collect:
            site[s] = root
            writes[s] += 1
    ncmp = evcmp.sum() + grpcmp.sum() + c3
    maxsize = grpmax.max() if ngrp > 0 else 0
    return parent, site, writes, ncmp, maxsize


class TCState:
    """Hand-driven version of the contraction merge steps.

    Holds one :class:`EdgeHeap` per live cluster representative and the
    output parent array. Each step returns the sorted protected set ``S``.
    """

    def __init__(self, t: WeightedTree, r: RankOrder):
        self.t = t
        self.r = r
        self.pool = HeapPool(r.rank)
        self.heaps: dict[int, EdgeHeap] = {x: self.pool.empty() for x in range(t.n)}
        self.parent = np.full(t.m, ROOT, np.int64)
        self.writes = np.zeros(t.m, np.int64)

    def _protect(self, s: np.ndarray, top: int) -> np.ndarray:
        s = s[np.argsort(self.r.rank[s], kind="stable")]
        if s.size:
            self.parent[s[:-1]] = s[1:]
            self.parent[s[-1]] = top
            self.writes[s] += 1
        return s

    def _contract(self, v: int, e: int) -> tuple[np.ndarray, EdgeHeap]:
        s, rest = filter_and_insert(self.heaps.pop(v), e)
        return self._protect(s, e), rest

    def rake_step(self, u: int, v: int, e: int) -> np.ndarray:
        """Rake leaf ``v`` into ``u`` along ``e``."""
        s, rest = self._contract(v, e)
        self.heaps[u] = meld(self.heaps[u], rest)
        return s

    def compress_step(self, u: int, v: int, w: int, e1: int, e2: int) -> np.ndarray:
        """Compress ``v`` (neighbors ``u`` via ``e1`` and ``w`` via ``e2``).

        The heap travels across whichever of the two edges has lower rank.
        """
        rank = self.r.rank
        if rank[e1] > rank[e2]:
            u, w, e1, e2 = w, u, e2, e1
        s, rest = self._contract(v, e1)
        self.heaps[u] = meld(self.heaps[u], rest)
        return s

    def fan_in_reduce(self, u: int, events: list[tuple[int, int]]) -> EdgeHeap:
        """Contract several leaves ``(v, e)`` into ``u`` at once.

        The filtered heaps are melded pairwise in a balanced tree, then into
        ``H_u``.
        """
        parts = [self._contract(v, e)[1] for v, e in events]
        while len(parts) > 1:
            nxt = [meld(a, b) for a, b in zip(parts[::2], parts[1::2])]
            if len(parts) % 2:
                nxt.append(parts[-1])
            parts = nxt
        if parts:
            self.heaps[u] = meld(self.heaps[u], parts[0])
        return self.heaps[u]

    def finalize_root(self, root: int) -> np.ndarray:
        """Sort and chain whatever is left in the last cluster's heap."""
        h = self.heaps.pop(root)
        s = np.asarray(h.items(), dtype=np.int64)
        h._consume()
        return self._protect(s, ROOT)

    def run(self, rct: RCTree) -> Dendrogram:
        """Replay a whole contraction schedule with the step methods."""
        ev, ph_start, grp_start, _ = _schedule(rct, self.r)
        for g in range(grp_start.size - 1):
            group = ev[grp_start[g] : grp_start[g + 1]]
            u = int(rct.parent[group[0]])
            self.fan_in_reduce(u, [(int(x), int(rct.edge[x])) for x in group])
        self.finalize_root(rct.root)
        return Dendrogram(self.parent.copy())
