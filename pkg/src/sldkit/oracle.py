"""Reference dendrogram builders used for differential testing.

``brute_force_sld`` follows the clustering definition literally with explicit
vertex-to-cluster maps, so it shares no code with any union-find. ``sequf_build``
is the fast sequential baseline. ``sld_merge_reference`` and
``suboptimal_tree_contraction_sld`` build dendrograms by merging sorted spine
lists, which gives a second, independent route through the contraction
schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import ROOT, Dendrogram, RankOrder, WeightedTree
from .contraction import ROOT_KIND, contract

SUBOPTIMAL_CAP = 10_000


def brute_force_sld(t: WeightedTree, r: RankOrder) -> Dendrogram:
    """Merge clusters edge by edge in rank order.

    When edge ``e`` joins clusters A and B, the current top edge of each
    (the last edge merged inside it) gets ``e`` as its parent.
    """
    m = t.m
    parent = [ROOT] * m
    cluster = list(range(t.n))
    members = {x: [x] for x in range(t.n)}
    top: dict[int, int] = {}
    u, v = t.u.tolist(), t.v.tolist()
    for e in r.order.tolist():
        a, b = cluster[u[e]], cluster[v[e]]
        if a == b:
            raise ValueError(f"edge {e} closes a cycle")
        for c in (a, b):
            if c in top:
                parent[top.pop(c)] = e
        if len(members[a]) < len(members[b]):
            a, b = b, a
        for x in members[b]:
            cluster[x] = a
        members[a].extend(members.pop(b))
        top[a] = e
    return Dendrogram(np.asarray(parent, dtype=np.int64))


def sequf_build(t: WeightedTree, r: RankOrder) -> Dendrogram:
    """Kruskal-style pass over edges in rank order with union-find.

    Union by size with path compression; each root remembers the last edge
    merged into its cluster.
    """
    return Dendrogram(_sequf(t.n, t.u, t.v, r.order))


@njit(cache=True)
def _sequf(n, u, v, order):
    m = order.size
    parent = np.full(m, -1, np.int64)
    uf = np.arange(n)
    size = np.ones(n, np.int64)
    top = np.full(n, -1, np.int64)
    for i in range(m):
        e = order[i]
        a = u[e]
        while uf[a] != a:
            uf[a] = uf[uf[a]]
            a = uf[a]
        b = v[e]
        while uf[b] != b:
            uf[b] = uf[uf[b]]
            b = uf[b]
        if top[a] != -1:
            parent[top[a]] = e
        if top[b] != -1:
            parent[top[b]] = e
        if size[a] < size[b]:
            a, b = b, a
        uf[b] = a
        size[a] += size[b]
        top[a] = e
    return parent


# ---------------------------------------------------------------------------
# list-based merging


@dataclass
class PartialSLD:
    """Dendrogram of a connected subtree: its vertices, edges and parent links."""

    t: WeightedTree
    r: RankOrder
    vertices: frozenset
    parent: dict

    @classmethod
    def single_vertex(cls, t, r, x: int) -> "PartialSLD":
        return cls(t, r, frozenset([x]), {})

    @classmethod
    def single_edge(cls, t, r, e: int) -> "PartialSLD":
        return cls(t, r, frozenset([int(t.u[e]), int(t.v[e])]), {e: ROOT})

    @property
    def edges(self):
        return self.parent.keys()

    def characteristic_edge(self, x: int):
        """Lowest-ranked edge of this subtree incident to vertex ``x``."""
        off, _, eid = self.t.adjacency
        rank = self.r.rank
        best = None
        for e in eid[off[x] : off[x + 1]].tolist():
            if e in self.parent and (best is None or rank[e] < rank[best]):
                best = e
        return best

    def spine(self, e) -> list[int]:
        out = []
        while e is not None and e != ROOT:
            out.append(e)
            e = self.parent[e]
        return out


def sld_merge_reference(d1: PartialSLD, d2: PartialSLD, v: int) -> PartialSLD:
    """Merge the dendrograms of two subtrees sharing only vertex ``v``.

    Only the two characteristic spines (from the lowest-ranked edge at ``v``
    on each side) are rewired, by a sorted-list merge; every other parent is
    copied unchanged.
    """
    if d1.vertices & d2.vertices != {v}:
        raise ValueError(f"subtrees must share exactly vertex {v}")
    if d1.edges & d2.edges:
        raise ValueError("subtrees must not share edges")
    rank = d1.r.rank
    s1 = d1.spine(d1.characteristic_edge(v))
    s2 = d2.spine(d2.characteristic_edge(v))
    merged = []
    i = j = 0
    while i < len(s1) and j < len(s2):
        if rank[s1[i]] < rank[s2[j]]:
            merged.append(s1[i])
            i += 1
        else:
            merged.append(s2[j])
            j += 1
    merged.extend(s1[i:])
    merged.extend(s2[j:])
    parent = dict(d1.parent)
    parent.update(d2.parent)
    for a, b in zip(merged, merged[1:]):
        parent[a] = b
    if merged:
        parent[merged[-1]] = ROOT
    return PartialSLD(d1.t, d1.r, d1.vertices | d2.vertices, parent)


def _reduce_at(parts: list[PartialSLD], x: int) -> PartialSLD:
    # balanced pairwise reduce of subtrees that all meet at vertex x
    while len(parts) > 1:
        nxt = [sld_merge_reference(a, b, x) for a, b in zip(parts[::2], parts[1::2])]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def suboptimal_tree_contraction_sld(
    t: WeightedTree, r: RankOrder, seed: int = 0, cap: int = SUBOPTIMAL_CAP
) -> Dendrogram:
    """Run the contraction schedule, realising every rake/compress as two list merges.

    For a vertex ``x`` contracting along edge ``e = (a, b)`` with ``a`` in
    x's cluster: first merge the single edge into x's dendrogram at ``a``,
    then merge the result into the target's dendrogram at ``b``. Clusters
    landing on the same target vertex in one step are first reduced among
    themselves.
    """
    if t.n > cap:
        raise ValueError(f"n = {t.n} exceeds the reference cap of {cap}")
    rct = contract(t, r, seed)
    owner = list(range(t.n))
    members = {x: [x] for x in range(t.n)}
    sld = {x: PartialSLD.single_vertex(t, r, x) for x in range(t.n)}
    rank = r.rank
    phase = rct.phase()
    events = [x for x in np.lexsort((rank[rct.edge], phase)).tolist() if rct.kind[x] != ROOT_KIND]
    i = 0
    while i < len(events):
        j = i
        while j < len(events) and phase[events[j]] == phase[events[i]]:
            j += 1
        incoming: dict[int, dict[int, list[PartialSLD]]] = {}
        for x in events[i:j]:
            e = int(rct.edge[x])
            a, b = int(t.u[e]), int(t.v[e])
            if owner[a] != x:
                a, b = b, a
            grown = sld_merge_reference(sld.pop(x), PartialSLD.single_edge(t, r, e), a)
            incoming.setdefault(int(rct.parent[x]), {}).setdefault(b, []).append(grown)
        for x in events[i:j]:
            y = int(rct.parent[x])
            for z in members[x]:
                owner[z] = y
            members[y].extend(members.pop(x))
        for y, by_vertex in incoming.items():
            for b, parts in by_vertex.items():
                sld[y] = sld_merge_reference(sld[y], _reduce_at(parts, b), b)
        i = j
    (final,) = sld.values()
    parent = np.full(t.m, ROOT, np.int64)
    for e, p in final.parent.items():
        parent[e] = p
    return Dendrogram(parent)
