"""Rake/compress tree contraction and the RC-tree it induces.

Each round first rakes every leaf into its neighbor, then compresses an
independent set of degree-2 vertices picked by seeded coin flips. A
compressed vertex always merges across its lesser-ranked edge, which is what
the spine-heap and tracing algorithms rely on.

The contracted tree lives in per-vertex doubly linked lists of half-edge
slots. Compress never relinks anything: it rewrites the two slots facing the
removed vertex in place, so concurrent compresses touch disjoint memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import RankOrder, Violation, WeightedTree
from .parallel import splitmix64

RAKE, COMPRESS, ROOT_KIND = 0, 1, 2
KIND_NAMES = ("rake", "compress", "root")

ROUND_CONSTANT = 8
"""Contraction finishes within ``ROUND_CONSTANT * (log2(n) + 1)`` rounds."""


def round_bound(n: int) -> int:
    return int(ROUND_CONSTANT * (math.log2(max(n, 2)) + 1))


@dataclass(frozen=True, eq=False)
class RCTree:
    """One rcnode per vertex.

    ``parent[x]`` is the vertex ``x`` merged into (-1 for the root), ``kind[x]``
    one of rake / compress / root, ``round[x]`` the round it contracted in and
    ``edge[x]`` the edge it contracted along (-1 for the root). Within a round,
    all rakes happen before all compresses.
    """

    parent: np.ndarray
    kind: np.ndarray
    round: np.ndarray
    edge: np.ndarray
    rounds: int
    seed: int = 0

    @property
    def n(self) -> int:
        return int(self.parent.size)

    @property
    def root(self) -> int:
        return int(np.flatnonzero(self.parent == -1)[0])

    def vertex_of_edge(self) -> np.ndarray:
        """Inverse of ``edge``: the rcnode each edge is associated with."""
        out = np.full(max(self.n - 1, 0), -1, np.int64)
        mask = self.edge >= 0
        out[self.edge[mask]] = np.flatnonzero(mask)
        return out

    def phase(self) -> np.ndarray:
        """Global sub-step index: ``2 * round + kind`` (root gets the last one)."""
        return 2 * self.round + np.minimum(self.kind, 1)

    def height(self) -> int:
        return int(_rct_height(self.parent))

    def dump(self) -> str:
        """One line per rcnode: ``vertex kind round parent edge``."""
        lines = [
            f"{x} {KIND_NAMES[k]} {r} {p} {e}"
            for x, (k, r, p, e) in enumerate(
                zip(self.kind.tolist(), self.round.tolist(), self.parent.tolist(), self.edge.tolist())
            )
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def contract(t: WeightedTree, r: RankOrder, seed: int = 0) -> RCTree:
    """Contract ``t`` to a single vertex and return the RC-tree.

    The schedule depends only on ``(t, r, seed)``, never on the thread count.
    """
    if t.n < 1:
        raise ValueError("cannot contract an empty tree")
    parent, kind, rnd, edge, rounds = _contract(t.n, t.u, t.v, r.rank, np.uint64(seed & (2**64 - 1)))
    rct = RCTree(parent, kind, rnd, edge, int(rounds), seed)
    if rct.rounds > round_bound(t.n):
        raise RuntimeError(f"contraction took {rct.rounds} rounds, bound is {round_bound(t.n)}")
    return rct


@njit(cache=True, inline="always")
def _coin(seed, rnd, x):
    h = splitmix64(seed ^ splitmix64(np.uint64(rnd) * np.uint64(0x100000001B3) + np.uint64(x)))
    return (h & np.uint64(1)) == np.uint64(1)


@njit(cache=True, parallel=True)
def _contract(n, u, v, rank, seed):
    m = u.size
    rc_parent = np.full(n, -1, np.int64)
    rc_kind = np.full(n, ROOT_KIND, np.int64)
    rc_round = np.zeros(n, np.int64)
    rc_edge = np.full(n, -1, np.int64)
    if n == 1:
        return rc_parent, rc_kind, rc_round, rc_edge, 0

    # half-edge slot 2e sits at u[e], slot 2e+1 at v[e]
    nbr = np.empty(2 * m, np.int64)
    edg = np.empty(2 * m, np.int64)
    twin = np.empty(2 * m, np.int64)
    nxt = np.full(2 * m, -1, np.int64)
    prv = np.full(2 * m, -1, np.int64)
    head = np.full(n, -1, np.int64)
    deg = np.zeros(n, np.int64)
    for e in range(m):
        for side in range(2):
            s = 2 * e + side
            x = u[e] if side == 0 else v[e]
            nbr[s] = v[e] if side == 0 else u[e]
            edg[s] = e
            twin[s] = s ^ 1
            nxt[s] = head[x]
            if head[x] != -1:
                prv[head[x]] = s
            head[x] = s
            deg[x] += 1

    live = np.arange(n)
    nlive = n
    act = np.zeros(n, np.int8)
    coin = np.zeros(n, np.bool_)
    rnd = 0
    while nlive > 1:
        # -- rake every leaf; of two adjacent leaves the larger id goes
        for i in prange(nlive):
            x = live[i]
            act[x] = 0
            coin[x] = _coin(seed, rnd, x)
            if deg[x] == 1:
                y = nbr[head[x]]
                if deg[y] != 1 or x > y:
                    act[x] = 1
        for i in range(nlive):
            x = live[i]
            if act[x] == 1:
                s = head[x]
                y = nbr[s]
                rc_parent[x] = y
                rc_kind[x] = RAKE
                rc_round[x] = rnd
                rc_edge[x] = edg[s]
                a = twin[s]
                if prv[a] != -1:
                    nxt[prv[a]] = nxt[a]
                else:
                    head[y] = nxt[a]
                if nxt[a] != -1:
                    prv[nxt[a]] = prv[a]
                deg[y] -= 1
                deg[x] = 0
        # -- compress an independent set of degree-2 vertices
        for i in prange(nlive):
            x = live[i]
            if act[x] == 1:
                continue
            if deg[x] == 2 and coin[x]:
                s1 = head[x]
                s2 = nxt[s1]
                y1 = nbr[s1]
                y2 = nbr[s2]
                ok = (deg[y1] != 2 or not coin[y1]) and (deg[y2] != 2 or not coin[y2])
                if ok:
                    act[x] = 2
        for i in prange(nlive):
            x = live[i]
            if act[x] == 2:
                s1 = head[x]
                s2 = nxt[s1]
                if rank[edg[s1]] > rank[edg[s2]]:
                    s1, s2 = s2, s1
                y = nbr[s1]
                w = nbr[s2]
                a = twin[s1]
                b = twin[s2]
                nbr[a] = w
                edg[a] = edg[s2]
                twin[a] = b
                nbr[b] = y
                twin[b] = a
                rc_parent[x] = y
                rc_kind[x] = COMPRESS
                rc_round[x] = rnd
                rc_edge[x] = edg[s1]
                deg[x] = 0
        k = 0
        for i in range(nlive):
            x = live[i]
            if act[x] == 0:
                live[k] = x
                k += 1
            act[x] = 0
        nlive = k
        rnd += 1
    rc_round[live[0]] = rnd
    return rc_parent, rc_kind, rc_round, rc_edge, rnd


@njit(cache=True)
def _rct_height(parent):
    n = parent.size
    depth = np.zeros(n, np.int64)
    stack = np.empty(n, np.int64)
    best = 0
    for s in range(n):
        top = 0
        x = s
        while x != -1 and depth[x] == 0:
            stack[top] = x
            top += 1
            x = parent[x]
        base = 0 if x == -1 else depth[x]
        while top > 0:
            top -= 1
            base += 1
            depth[stack[top]] = base
        best = max(best, depth[s])
    return best


def rct_path_to_root(rct: RCTree, v: int):
    """Yield ``(rcnode, edge)`` from ``v`` up to and including the root."""
    x = int(v)
    for _ in range(rct.n):
        yield x, int(rct.edge[x])
        if rct.parent[x] == -1:
            return
        x = int(rct.parent[x])
    raise RuntimeError("rc-tree parent pointers contain a cycle")


def validate_rctree(rct: RCTree, t: WeightedTree, r: RankOrder) -> Violation | None:
    """Replay the recorded contraction on a fresh copy of ``t``.

    Checks the kind-specific degree preconditions, that each rcnode's parent
    and edge match the contracted tree at that moment, that compresses pick
    the lesser-ranked edge and form an independent set, and that edges and
    non-root rcnodes are in bijection.
    """
    n = t.n
    if rct.n != n:
        return Violation("size", rct.n, f"rc-tree has {rct.n} nodes for {n} vertices")
    roots = np.flatnonzero(rct.kind == ROOT_KIND)
    if roots.size != 1:
        return Violation("root-count", int(roots.size), f"expected one root, found {roots.size}")
    root = int(roots[0])
    if rct.parent[root] != -1 or rct.edge[root] != -1:
        return Violation("root", root, "root must have no parent and no edge")
    nonroot = np.flatnonzero(rct.kind != ROOT_KIND)
    edges = rct.edge[nonroot]
    if edges.size and (edges.min() < 0 or edges.max() >= t.m):
        return Violation("bijection", int(nonroot[0]), "rcnode edge id out of range")
    counts = np.bincount(edges, minlength=t.m) if t.m else np.zeros(0, np.int64)
    if t.m and (counts != 1).any():
        e = int(np.flatnonzero(counts != 1)[0])
        owners = nonroot[edges == e].tolist()
        return Violation("bijection", e, f"edge {e} is associated with rcnodes {owners}")

    rank = r.rank
    adj: list[dict[int, int]] = [dict() for _ in range(n)]
    for e, (a, b) in enumerate(zip(t.u.tolist(), t.v.tolist())):
        adj[a][b] = e
        adj[b][a] = e
    alive = [True] * n
    phase = rct.phase()
    order = np.lexsort((np.arange(n), phase))
    i = 0
    while i < order.size:
        ph = phase[order[i]]
        j = i
        while j < order.size and phase[order[j]] == ph:
            j += 1
        group = [int(x) for x in order[i:j] if rct.kind[x] != ROOT_KIND]
        members = set(group)
        for x in group:
            p = int(rct.parent[x])
            e = int(rct.edge[x])
            if not alive[x]:
                return Violation("replay", x, f"vertex {x} contracted twice")
            if rct.kind[x] == RAKE:
                if len(adj[x]) != 1:
                    return Violation("rake-degree", x, f"vertex {x} raked with degree {len(adj[x])}")
                if adj[x].get(p) != e:
                    return Violation("rake-target", x, f"vertex {x} is not joined to {p} by edge {e}")
                if p in members:
                    return Violation("rake-target", x, f"vertex {x} raked into {p}, which rakes in the same round")
            else:
                if len(adj[x]) != 2:
                    return Violation("compress-degree", x, f"vertex {x} compressed with degree {len(adj[x])}")
                if p not in adj[x] or adj[x][p] != e:
                    return Violation("compress-target", x, f"vertex {x} is not joined to {p} by edge {e}")
                (w, e2), = [(y, f) for y, f in adj[x].items() if y != p]
                if rank[e] > rank[e2]:
                    return Violation(
                        "compress-direction", x,
                        f"vertex {x} merged across edge {e} (rank {rank[e]}) instead of "
                        f"lesser edge {e2} (rank {rank[e2]})",
                    )
                if p in members or w in members:
                    return Violation("independence", x, f"vertex {x} compressed next to another compress")
        for x in group:
            p = int(rct.parent[x])
            if rct.kind[x] == RAKE:
                del adj[p][x]
            else:
                (w, e2), = [(y, f) for y, f in adj[x].items() if y != p]
                del adj[p][x]
                del adj[w][x]
                adj[p][w] = e2
                adj[w][p] = e2
            adj[x] = {}
            alive[x] = False
        i = j
    left = [x for x in range(n) if alive[x]]
    if left != [root]:
        return Violation("replay", left[:5], f"vertices {left[:5]} remain after the schedule")
    return None
