"""Input trees, rank order, dendrograms and their structural validators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

ROOT = -1
"""Parent value of the dendrogram root."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Violation:
    """First broken invariant found by a validator."""

    rule: str
    witness: object
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.message}"


@dataclass(frozen=True, eq=False)
class WeightedTree:
    """Edge-weighted tree on vertices ``0..n-1``.

    Edge ``i`` joins ``u[i]`` and ``v[i]`` with weight ``w[i]``. Arrays are
    read-only after construction. Nothing is validated here beyond array
    shapes; call :func:`validate_tree` before trusting the structure.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.int64)
        v = np.ascontiguousarray(self.v, dtype=np.int64)
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if not (u.ndim == v.ndim == w.ndim == 1) or not (u.size == v.size == w.size):
            raise ValueError("u, v, w must be 1-d arrays of equal length")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "v", _frozen(v))
        object.__setattr__(self, "w", _frozen(w))

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedTree":
        """Build from an iterable of ``(u, v, w)`` triples."""
        arr = np.asarray(list(edges), dtype=np.float64).reshape(-1, 3)
        return cls(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2])

    @property
    def m(self) -> int:
        return int(self.u.size)

    @cached_property
    def lo(self) -> np.ndarray:
        return _frozen(np.minimum(self.u, self.v))

    @cached_property
    def hi(self) -> np.ndarray:
        return _frozen(np.maximum(self.u, self.v))

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR adjacency ``(offsets, neighbor, edge)``.

        Vertex ``x`` has neighbors ``neighbor[offsets[x]:offsets[x+1]]``
        reached through the matching entries of ``edge``.
        """
        off, nbr, eid = _build_csr(self.n, self.u, self.v)
        return _frozen(off), _frozen(nbr), _frozen(eid)

    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency[0])

    def neighbors(self, x: int):
        off, nbr, eid = self.adjacency
        return list(zip(nbr[off[x] : off[x + 1]].tolist(), eid[off[x] : off[x + 1]].tolist()))

    def with_weights(self, w) -> "WeightedTree":
        return WeightedTree(self.n, self.u, self.v, np.asarray(w, dtype=np.float64))

    def edges(self):
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))


@njit(cache=True)
def _build_csr(n, u, v):
    m = u.size
    deg = np.zeros(n + 1, np.int64)
    for i in range(m):
        deg[u[i] + 1] += 1
        deg[v[i] + 1] += 1
    off = np.cumsum(deg)
    fill = off[:-1].copy()
    nbr = np.empty(2 * m, np.int64)
    eid = np.empty(2 * m, np.int64)
    for i in range(m):
        a = u[i]
        b = v[i]
        nbr[fill[a]] = b
        eid[fill[a]] = i
        fill[a] += 1
        nbr[fill[b]] = a
        eid[fill[b]] = i
        fill[b] += 1
    return off, nbr, eid


def validate_tree(t: WeightedTree) -> Violation | None:
    """Return the first violated tree invariant, or ``None`` if ``t`` is a tree."""
    n, m = t.n, t.m
    if n < 1:
        return Violation("vertex-count", n, f"need at least one vertex, got n={n}")
    if m != n - 1:
        return Violation("edge-count", m, f"a tree on {n} vertices has {n - 1} edges, got {m}")
    if m == 0:
        return None
    bad = np.flatnonzero((t.u < 0) | (t.u >= n) | (t.v < 0) | (t.v >= n))
    if bad.size:
        e = int(bad[0])
        return Violation("bad-id", e, f"edge {e} = ({t.u[e]}, {t.v[e]}) has an endpoint outside [0, {n})")
    loops = np.flatnonzero(t.u == t.v)
    if loops.size:
        e = int(loops[0])
        return Violation("self-loop", e, f"edge {e} joins vertex {t.u[e]} to itself")
    lo, hi = t.lo, t.hi
    order = np.lexsort((hi, lo))
    same = (lo[order[1:]] == lo[order[:-1]]) & (hi[order[1:]] == hi[order[:-1]])
    if same.any():
        k = int(np.flatnonzero(same)[0])
        a, b = sorted((int(order[k]), int(order[k + 1])))
        return Violation("duplicate-edge", (a, b), f"edges {a} and {b} both join {lo[a]} and {hi[a]}")
    ncomp, label = _components(n, t.u, t.v)
    if ncomp != 1:
        x = int(np.flatnonzero(label != label[0])[0])
        return Violation(
            "disconnected",
            x,
            f"{ncomp} components (vertex {x} unreachable from vertex 0); "
            "with n-1 edges this also means a cycle",
        )
    return None


@njit(cache=True)
def _components(n, u, v):
    par = np.arange(n)
    for i in range(u.size):
        a = u[i]
        while par[a] != a:
            par[a] = par[par[a]]
            a = par[a]
        b = v[i]
        while par[b] != b:
            par[b] = par[par[b]]
            b = par[b]
        if a != b:
            par[max(a, b)] = min(a, b)
    label = np.empty(n, np.int64)
    count = 0
    for x in range(n):
        a = x
        while par[a] != a:
            a = par[a]
        label[x] = a
        if a == x:
            count += 1
    return count, label


def require_tree(t: WeightedTree) -> None:
    bad = validate_tree(t)
    if bad is not None:
        raise ValueError(f"invalid tree: {bad}")


def compare_edges(a: int, b: int, t: WeightedTree) -> int:
    """Order two distinct edges by ``(weight, min endpoint, max endpoint)``.

    Returns -1 if ``a`` comes first and 1 otherwise.
    """
    if a == b:
        raise ValueError("compare_edges needs two distinct edges")
    ka = (t.w[a], t.lo[a], t.hi[a])
    kb = (t.w[b], t.lo[b], t.hi[b])
    return -1 if ka < kb else 1


@dataclass(frozen=True, eq=False)
class RankOrder:
    """``rank[e]`` is the position of edge ``e`` in tie-broken weight order;
    ``order`` is the inverse permutation (edges listed by rank)."""

    rank: np.ndarray
    order: np.ndarray = field(default=None)

    def __post_init__(self):
        rank = _frozen(np.ascontiguousarray(self.rank, dtype=np.int64))
        object.__setattr__(self, "rank", rank)
        if self.order is None:
            if rank.size and (rank.min() < 0 or rank.max() >= rank.size):
                raise ValueError("ranks must lie in [0, m)")
            order = np.full_like(rank, -1)
            order[rank] = np.arange(rank.size)
            if (order < 0).any():
                raise ValueError("ranks must be a permutation of 0..m-1")
        else:
            order = np.ascontiguousarray(self.order, dtype=np.int64)
        object.__setattr__(self, "order", _frozen(order))

    def __len__(self) -> int:
        return int(self.rank.size)


def compute_ranks(t: WeightedTree) -> RankOrder:
    """Rank every edge by ``(w, min endpoint, max endpoint)``."""
    order = np.lexsort((t.hi, t.lo, t.w)).astype(np.int64)
    rank = np.empty(t.m, np.int64)
    rank[order] = np.arange(t.m, dtype=np.int64)
    return RankOrder(rank, order)


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """SLD over the ``n - 1`` edge nodes: ``parent[e]`` is an edge id or :data:`ROOT`."""

    parent: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent", np.ascontiguousarray(self.parent, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.parent.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dendrogram):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    __hash__ = None

    @property
    def root(self) -> int:
        roots = np.flatnonzero(self.parent == ROOT)
        return int(roots[0]) if roots.size else ROOT

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(len(self))]
        for e, p in enumerate(self.parent.tolist()):
            if p != ROOT:
                kids[p].append(e)
        return kids

    def spine(self, e: int) -> list[int]:
        """Node ``e`` followed by its ancestors up to the root."""
        out = [e]
        p = int(self.parent[e])
        while p != ROOT and len(out) <= len(self):
            out.append(p)
            p = int(self.parent[p])
        return out


def validate_dendrogram(d: Dendrogram, r: RankOrder) -> Violation | None:
    """Return the first broken dendrogram invariant, or ``None``."""
    parent = d.parent
    m = len(r)
    if parent.size != m:
        return Violation("size", parent.size, f"expected {m} parent entries, got {parent.size}")
    if m == 0:
        return None
    code, witness = _check_dendrogram(parent, r.rank)
    if code == 0:
        return None
    w = int(witness)
    messages = {
        1: ("range", f"parent[{w}] = {parent[w]} is neither an edge id nor ROOT"),
        2: ("root-count", f"expected exactly one ROOT entry, found {w}"),
        3: ("cycle", f"following parents from edge {w} revisits a node"),
        4: ("rank-monotonicity", f"rank(parent({w})) = {r.rank[parent[w]]} <= rank({w}) = {r.rank[w]}"
            if 0 <= w < m and 0 <= parent[w] < m else f"edge {w}"),
        5: ("root-rank", f"root {w} is not the maximum-rank edge"),
        6: ("arity", f"node {w} has more than two children"),
    }
    rule, msg = messages[int(code)]
    return Violation(rule, w, msg)


@njit(cache=True)
def _check_dendrogram(parent, rank):
    m = parent.size
    roots = 0
    for e in range(m):
        p = parent[e]
        if p != -1 and (p < 0 or p >= m):
            return 1, e
        if p == -1:
            roots += 1
    if roots != 1:
        return 2, roots
    state = np.zeros(m, np.int8)
    for s in range(m):
        if state[s] != 0:
            continue
        x = s
        while x != -1 and state[x] == 0:
            state[x] = 1
            x = parent[x]
        if x != -1 and state[x] == 1:
            return 3, s
        x = s
        while x != -1 and state[x] == 1:
            state[x] = 2
            x = parent[x]
    for e in range(m):
        p = parent[e]
        if p != -1 and rank[p] <= rank[e]:
            return 4, e
    for e in range(m):
        if parent[e] == -1 and rank[e] != m - 1:
            return 5, e
    kids = np.zeros(m, np.int64)
    for e in range(m):
        p = parent[e]
        if p != -1:
            kids[p] += 1
            if kids[p] > 2:
                return 6, p
    return 0, 0


def dendrogram_height(d: Dendrogram) -> int:
    """Longest node-to-root path, counted in edge nodes."""
    if len(d) == 0:
        return 0
    return int(_height(d.parent))


@njit(cache=True)
def _height(parent):
    m = parent.size
    depth = np.zeros(m, np.int64)
    stack = np.empty(m, np.int64)
    best = 0
    for s in range(m):
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
        if depth[s] > best:
            best = depth[s]
    return best


def _side_search(t: WeightedTree, r: RankOrder, e: int, side: int):
    """Walk from endpoint ``side`` of ``e`` through edges ranked below ``e``.

    Returns the crossed edges (adjacent inferiors) and the frontier edges
    ranked above ``e`` (adjacent superiors) on that side.
    """
    if side not in (int(t.u[e]), int(t.v[e])):
        raise ValueError(f"vertex {side} is not an endpoint of edge {e}")
    rank = r.rank
    re = rank[e]
    off, nbr, eid = t.adjacency
    inferiors: set[int] = set()
    superiors: set[int] = set()
    seen = {side}
    queue = deque([side])
    while queue:
        x = queue.popleft()
        for k in range(off[x], off[x + 1]):
            g = int(eid[k])
            if g == e:
                continue
            if rank[g] < re:
                y = int(nbr[k])
                if y not in seen:
                    seen.add(y)
                    inferiors.add(g)
                    queue.append(y)
            else:
                superiors.add(g)
    return inferiors, superiors


def adjacent_inferiors(t: WeightedTree, r: RankOrder, e: int, side: int) -> set[int]:
    """Edges ranked below ``e`` reachable from endpoint ``side`` through such edges only."""
    return _side_search(t, r, e, side)[0]


def adjacent_superiors(t: WeightedTree, r: RankOrder, e: int, side: int) -> set[int]:
    """Edges ranked above ``e`` whose path to endpoint ``side`` stays below ``e``."""
    return _side_search(t, r, e, side)[1]
