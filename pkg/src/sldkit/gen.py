"""Input trees, weight schemes and the graph-to-tree reduction."""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import WeightedTree

WEIGHT_SCHEMES = ("unit", "perm", "low-par")


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")


def _unit(n: int, u, v) -> WeightedTree:
    return WeightedTree(n, np.asarray(u, np.int64), np.asarray(v, np.int64), np.ones(n - 1))


def gen_path(n: int) -> WeightedTree:
    """Path ``0 - 1 - ... - n-1``; edge ``i`` joins ``i`` and ``i + 1``."""
    _check_n(n)
    i = np.arange(n - 1)
    return _unit(n, i, i + 1)


def gen_star(n: int) -> WeightedTree:
    """Vertex 0 joined to every other vertex."""
    _check_n(n)
    return _unit(n, np.zeros(n - 1, np.int64), np.arange(1, n))


def gen_knuth(n: int, seed: int = 0) -> WeightedTree:
    """Random recursive tree: vertex ``i > 0`` attaches to a uniform vertex below it."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    child = np.arange(1, n)
    par = (rng.random(n - 1) * child).astype(np.int64)
    return _unit(n, par, child)


def gen_star_forest(n: int, h: int) -> list[WeightedTree]:
    """``n // h`` separate stars of ``h`` vertices each.

    If ``h`` does not divide ``n`` the leftover vertices form one smaller
    star (dropped if it would have fewer than 2 vertices).
    """
    if h < 2:
        raise ValueError(f"star size must be at least 2, got {h}")
    sizes = [h] * (n // h)
    if n % h >= 2:
        sizes.append(n % h)
    return [gen_star(k) for k in sizes]


def low_par_weights(m: int) -> np.ndarray:
    """Increasing over the first half of the edges, decreasing over the rest."""
    half = -(-m // 2)
    i = np.arange(m)
    return np.where(i < half, i + 1, m - (i - half)).astype(np.float64)


def apply_weights(t: WeightedTree, scheme: str, seed: int = 0) -> WeightedTree:
    """Replace the weights of ``t``.

    ``unit`` sets every weight to 1, ``perm`` uses the positions of a seeded
    random permutation, ``low-par`` (paths only) rises then falls.
    """
    m = t.m
    if scheme == "unit":
        w = np.ones(m)
    elif scheme == "perm":
        w = np.random.default_rng(seed).permutation(m).astype(np.float64)
    elif scheme == "low-par":
        i = np.arange(m)
        if not (np.array_equal(t.u, i) and np.array_equal(t.v, i + 1)):
            raise ValueError("low-par weights need a path with edge i = (i, i+1)")
        w = low_par_weights(m)
    else:
        raise ValueError(f"unknown weight scheme {scheme!r}; expected one of {WEIGHT_SCHEMES}")
    return t.with_weights(w)


def mst_reduce(n: int, u, v, w) -> WeightedTree:
    """Minimum spanning tree of a connected weighted graph.

    Edges are considered by ``(w, min(u, v), max(u, v))`` so the result
    matches the tie-breaking used for ranks.
    """
    u = np.asarray(u, np.int64)
    v = np.asarray(v, np.int64)
    w = np.asarray(w, np.float64)
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise ValueError("edge endpoint out of range")
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo, w))
    keep = _kruskal(n, lo, hi, order)
    if keep.size != n - 1:
        raise ValueError(f"graph is disconnected: spanning forest has {keep.size} of {n - 1} edges")
    keep.sort()
    return WeightedTree(n, u[keep], v[keep], w[keep])


@njit(cache=True)
def _kruskal(n, a, b, order):
    uf = np.arange(n)
    keep = np.empty(max(n - 1, 0), np.int64)
    k = 0
    for e in order:
        x = a[e]
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        y = b[e]
        while uf[y] != y:
            uf[y] = uf[uf[y]]
            y = uf[y]
        if x != y:
            uf[x] = y
            keep[k] = e
            k += 1
            if k == n - 1:
                break
    return keep[:k]


def split_forest(n: int, u, v, w) -> list[tuple[np.ndarray, np.ndarray, WeightedTree]]:
    """Split a forest into its trees.

    Returns ``(vertex_ids, edge_ids, tree)`` triples where ``tree`` uses
    local ids: local vertex ``i`` is ``vertex_ids[i]`` and local edge ``j`` is
    ``edge_ids[j]`` in the input. Isolated vertices are skipped.
    """
    u = np.asarray(u, np.int64)
    v = np.asarray(v, np.int64)
    w = np.asarray(w, np.float64)
    label = _labels(n, u, v)
    vorder = np.argsort(label, kind="stable")
    eorder = np.argsort(label[u], kind="stable")
    vcut = np.flatnonzero(np.diff(label[vorder])) + 1
    vstart = np.r_[0, vcut, n]
    estart = np.searchsorted(label[u][eorder], label[vorder][vstart[:-1]])
    estart = np.r_[estart, u.size]
    local = np.empty(n, np.int64)
    local[vorder] = np.arange(n) - np.repeat(vstart[:-1], np.diff(vstart))
    out = []
    for g in range(vstart.size - 1):
        verts = vorder[vstart[g] : vstart[g + 1]]
        if verts.size < 2:
            continue
        es = eorder[estart[g] : estart[g + 1]]
        out.append((verts, es, WeightedTree(verts.size, local[u[es]], local[v[es]], w[es])))
    return out


@njit(cache=True)
def _labels(n, u, v):
    uf = np.arange(n)
    for e in range(u.size):
        x = u[e]
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        y = v[e]
        while uf[y] != y:
            uf[y] = uf[uf[y]]
            y = uf[y]
        if x != y:
            uf[x] = y
    out = np.empty(n, np.int64)
    for x in range(n):
        y = x
        while uf[y] != y:
            y = uf[y]
        out[x] = y
    return out


def join_forest(trees: list[WeightedTree]) -> WeightedTree:
    """Place several trees side by side with shifted vertex ids.

    The result is a forest, so it will not pass :func:`validate_tree`; it is
    a container for writing multi-component inputs.
    """
    shift = np.cumsum([0] + [t.n for t in trees])
    u = np.concatenate([t.u + s for t, s in zip(trees, shift)]) if trees else np.zeros(0, np.int64)
    v = np.concatenate([t.v + s for t, s in zip(trees, shift)]) if trees else np.zeros(0, np.int64)
    w = np.concatenate([t.w for t in trees]) if trees else np.zeros(0)
    return WeightedTree(int(shift[-1]), u, v, w)


KINDS = ("path", "star", "knuth", "star-forest")


def make_input(kind: str, n: int, weights: str = "unit", seed: int = 0, h: int | None = None) -> WeightedTree:
    """Generator front end shared by the command line and benchmarks.

    ``star-forest`` returns the joined forest (see :func:`join_forest`).
    """
    if kind == "path":
        t = gen_path(n)
    elif kind == "star":
        t = gen_star(n)
    elif kind == "knuth":
        t = gen_knuth(n, seed)
    elif kind == "star-forest":
        if h is None:
            raise ValueError("star-forest needs a star size h")
        t = join_forest(gen_star_forest(n, h))
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    return apply_weights(t, weights, seed)
