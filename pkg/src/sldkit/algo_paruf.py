"""Asynchronous union-find dendrogram builder driven by local minima.

Every cluster keeps a neighbor-heap of its incident unmerged edges. Edge
``e`` has a status counting how many of its two endpoint clusters have ``e``
on top of their heap; at 2 it is a local minimum and safe to merge. A worker
that wins the ``2 -> -1`` claim on an edge merges the two clusters, makes the
new heap top the edge's parent, bumps that edge's status, and keeps going as
long as the bump made it ready.

A global counter tracks how many edges are ready (including one being
merged). When it drops to 1 there is a single local minimum left, the rest of
the dendrogram is a chain, and the workers stop: the unmerged edges are sorted
and chained instead.

Heap nodes are edge endpoints: node ``2e`` sits in the heap of ``u[e]``'s
cluster and ``2e + 1`` in that of ``v[e]``, both keyed by ``rank[e]``.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit, prange

from .core import ROOT, Dendrogram, RankOrder, WeightedTree
from .heap import EdgeHeap, HeapPool, delete_min, hp_delete_min, hp_insert, hp_meld, hp_min, insert, meld
from .parallel import atomic_add, atomic_cas, atomic_load, atomic_xchg

READY, ALMOST, NOT_READY, INACTIVE = 2, 1, 0, -1


def paruf_build(
    t: WeightedTree,
    r: RankOrder,
    postprocess: bool = True,
    jitter_seed: int | None = None,
    stats: dict | None = None,
) -> Dendrogram:
    """Build the dendrogram with asynchronous chain-following workers.

    Parameters
    ----------
    postprocess : stop the asynchronous phase once a single local minimum
        remains and finish by sorting.
    jitter_seed : shuffle the task order with this seed; the output must not
        change.
    stats : optional dict receiving ``phases`` (preprocess / async /
        postprocess seconds) and ``counters``.
    """
    m = t.m
    t0 = time.perf_counter()
    key = np.repeat(r.rank, 2)
    off, _, eid = t.adjacency
    hh, child, sibling, order, c0 = _build_heaps(t.n, t.u, off, eid, key)
    status = _init_status(t.u, t.v, hh, key, sibling)
    if jitter_seed is None:
        tasks = np.arange(m, dtype=np.int64)
    else:
        tasks = np.random.default_rng(jitter_seed).permutation(m).astype(np.int64)
    t1 = time.perf_counter()
    uf = np.arange(t.n, dtype=np.int64)
    glob = np.zeros(4, np.int64)
    parent, chain, cnt = _async(t.u, t.v, key, hh, child, sibling, order, status, tasks, uf, glob, postprocess)
    t2 = time.perf_counter()
    rest = np.flatnonzero(status >= 0)
    postprocess_tail_into(parent, rest, r.rank)
    t3 = time.perf_counter()
    if stats is not None:
        stats.setdefault("phases", {}).update(
            {"preprocess": t1 - t0, "async": t2 - t1, "postprocess": t3 - t2}
        )
        stats.setdefault("counters", {}).update(
            {
                "comparisons": int(c0 + cnt[3]),
                "async_steps": int(cnt[0]),
                "longest_chain": int(chain.max()) if m else 0,
                "chains": int((chain > 0).sum()),
                "merged_at_trigger": int(cnt[1]) if cnt[2] else -1,
                "postprocessed": int(rest.size),
            }
        )
    return Dendrogram(parent)


@njit(cache=True, parallel=True)
def _build_heaps(n, u, off, eid, key):
    m2 = key.size
    child = np.full(m2, -1, np.int64)
    sibling = np.full(m2, -1, np.int64)
    order = np.zeros(m2, np.int64)
    hh = np.full(n, -1, np.int64)
    ncmp = np.zeros(n, np.int64)
    for x in prange(n):
        h = -1
        c = 0
        for j in range(off[x], off[x + 1]):
            e = eid[j]
            node = 2 * e if u[e] == x else 2 * e + 1
            h, k = hp_insert(h, node, key, child, sibling, order)
            c += k
        hh[x] = h
        ncmp[x] = c
    return hh, child, sibling, order, ncmp.sum()


@njit(cache=True, parallel=True)
def _init_status(u, v, hh, key, sibling):
    m = u.size
    status = np.zeros(m, np.int64)
    for e in prange(m):
        s = 0
        a, _ = hp_min(hh[u[e]], key, sibling)
        if a >> 1 == e:
            s += 1
        b, _ = hp_min(hh[v[e]], key, sibling)
        if b >> 1 == e:
            s += 1
        status[e] = s
    return status


@njit(cache=True, inline="always")
def _find(uf, x):
    root = x
    while uf[root] != root:
        root = uf[root]
    while uf[x] != root:
        nxt = uf[x]
        atomic_xchg(uf, x, root)
        x = nxt
    return root


@njit(cache=True, parallel=True)
def _async(u, v, key, hh, child, sibling, order, status, tasks, uf, glob, postprocess):
    # uf and glob are only written through atomics, which numba cannot see;
    # taking them as arguments keeps it from forwarding their initial values.
    # glob: ready count, stop flag, merged count, merged count at trigger
    m = u.size
    parent = np.full(m, ROOT, np.int64)
    size = np.ones(uf.size, np.int64)
    chain = np.zeros(m, np.int64)
    tcmp = np.zeros(m, np.int64)
    glob[0] = (status == READY).sum()
    for i in prange(m):
        cur = tasks[i]
        if atomic_load(glob, 1) != 0:
            continue
        if not atomic_cas(status, cur, READY, INACTIVE):
            continue
        steps = 0
        c = 0
        while True:
            a = _find(uf, u[cur])
            b = _find(uf, v[cur])
            ha, x, k1 = hp_delete_min(hh[a], key, child, sibling, order)
            hb, y, k2 = hp_delete_min(hh[b], key, child, sibling, order)
            h, k3 = hp_meld(ha, hb, key, child, sibling, order)
            c += k1 + k2 + k3
            if size[a] < size[b]:
                a, b = b, a
            size[a] += size[b]
            hh[b] = -1
            hh[a] = h
            atomic_xchg(uf, b, a)
            steps += 1
            done = atomic_add(glob, 2, 1) + 1
            if h == -1:
                parent[cur] = ROOT
                atomic_add(glob, 0, -1)
                break
            top, k4 = hp_min(h, key, sibling)
            c += k4
            f = top >> 1
            parent[cur] = f
            now = atomic_add(status, f, 1) + 1
            if now == READY:
                atomic_add(glob, 0, 1)
            left = atomic_add(glob, 0, -1) - 1
            if postprocess and left == 1:
                if atomic_xchg(glob, 1, 1) == 0:
                    glob[3] = done
            if now != READY or atomic_load(glob, 1) != 0:
                break
            if not atomic_cas(status, f, READY, INACTIVE):
                break
            cur = f
        chain[i] = steps
        tcmp[i] = c
    cnt = np.empty(4, np.int64)
    cnt[0] = glob[2]
    cnt[1] = glob[3]
    cnt[2] = glob[1]
    cnt[3] = tcmp.sum()
    return parent, chain, cnt


def postprocess_tail_into(parent: np.ndarray, remaining: np.ndarray, rank: np.ndarray) -> None:
    """Chain ``remaining`` edges by increasing rank; the largest becomes the root."""
    if remaining.size == 0:
        return
    s = remaining[np.argsort(rank[remaining], kind="stable")]
    parent[s[:-1]] = s[1:]
    parent[s[-1]] = ROOT


def initial_status(t: WeightedTree, r: RankOrder) -> np.ndarray:
    """Statuses right after the neighbor-heaps are built (parallel kernels)."""
    key = np.repeat(r.rank, 2)
    off, _, eid = t.adjacency
    hh, _, sibling, _, _ = _build_heaps(t.n, t.u, off, eid, key)
    return _init_status(t.u, t.v, hh, key, sibling)


def init_status(t: WeightedTree, heaps: list[EdgeHeap]) -> np.ndarray:
    """Status of every edge given per-vertex neighbor-heaps of endpoint nodes."""
    status = np.zeros(t.m, np.int64)
    for h in heaps:
        if len(h):
            status[h.min() >> 1] += 1
    return status


class ParUFState:
    """Sequential, step-by-step version of the asynchronous algorithm.

    Useful for inspecting statuses and single merges on small inputs.
    """

    def __init__(self, t: WeightedTree, r: RankOrder):
        self.t = t
        self.r = r
        self.pool = HeapPool(np.repeat(r.rank, 2))
        self.heaps: list[EdgeHeap] = [self.pool.empty() for _ in range(t.n)]
        for e, (a, b) in enumerate(zip(t.u.tolist(), t.v.tolist())):
            self.heaps[a] = insert(self.heaps[a], 2 * e)
            self.heaps[b] = insert(self.heaps[b], 2 * e + 1)
        self.uf = np.arange(t.n)
        self.status = init_status(t, self.heaps)
        self.parent = np.full(t.m, ROOT, np.int64)

    def find(self, x: int) -> int:
        root = x
        while self.uf[root] != root:
            root = self.uf[root]
        while self.uf[x] != root:
            self.uf[x], x = root, self.uf[x]
        return int(root)

    def claim(self, e: int) -> bool:
        if self.status[e] != READY:
            return False
        self.status[e] = INACTIVE
        return True

    def merge_chain_step(self, cur: int) -> int | None:
        """Merge the clusters joined by claimed edge ``cur``.

        Returns the next edge of the chain if the merge made it ready and it
        was claimed, otherwise ``None``.
        """
        a, b = self.find(int(self.t.u[cur])), self.find(int(self.t.v[cur]))
        ha, x = delete_min(self.heaps[a])
        hb, y = delete_min(self.heaps[b])
        if x >> 1 != cur or y >> 1 != cur:
            raise RuntimeError(f"edge {cur} is not a local minimum")
        h = meld(ha, hb)
        self.uf[b] = a
        self.heaps[a] = h
        self.heaps[b] = self.pool.empty()
        if len(h) == 0:
            self.parent[cur] = ROOT
            return None
        f = h.min() >> 1
        self.parent[cur] = f
        self.status[f] += 1
        return f if self.claim(f) else None

    def postprocess_tail(self, remaining) -> None:
        postprocess_tail_into(self.parent, np.asarray(remaining, dtype=np.int64), self.r.rank)

    def run(self) -> Dendrogram:
        """Process every edge sequentially in index order, following chains."""
        for e in range(self.t.m):
            cur = e if self.claim(e) else None
            while cur is not None:
                cur = self.merge_chain_step(cur)
        return Dendrogram(self.parent.copy())


@njit(cache=True, parallel=True)
def _cas_race(status, wins, workers):
    for t in range(status.size):
        for w in prange(workers):
            if atomic_cas(status, t, READY, INACTIVE):
                atomic_add(wins, t, 1)


def cas_race(trials: int, workers: int) -> np.ndarray:
    """Let ``workers`` tasks race to claim one ready edge, ``trials`` times.

    Returns the number of winners per trial (always 1 if claims are sound).
    """
    status = np.full(int(trials), READY, np.int64)
    wins = np.zeros(int(trials), np.int64)
    _cas_race(status, wins, int(workers))
    return wins
