"""Meldable binomial min-heaps over edge ids, keyed by rank.

Heaps live in a shared node pool: one slot per element holding its first
child, next sibling and binomial order. A heap is just the index of the first
node of its root list (``-1`` when empty), with roots kept in increasing
order. The ``hp_*`` kernels are plain njit functions so the algorithm kernels
can call them from inside parallel loops; two heaps drawn from the same pool
never share nodes, so distinct owners can mutate them concurrently.

:class:`EdgeHeap` wraps the kernels for Python callers with consume-and-return
semantics: every operation hands back a new handle and retires its inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import Violation

MAX_ORDER = 66
PARALLEL_FILTER_THRESHOLD = 4096
"""Heaps at least this large take the bucketed rebuild path in :func:`filter`.
Both paths run the same kernel here; see the module notes in the README."""


@njit(cache=True, inline="always")
def hp_reset(x, child, sibling, order):
    child[x] = -1
    sibling[x] = -1
    order[x] = 0


@njit(cache=True, inline="always")
def hp_link(y, z, child, sibling, order):
    # y becomes the first child of z; both have the same order
    sibling[y] = child[z]
    child[z] = y
    order[z] += 1


@njit(cache=True)
def hp_merge_lists(h1, h2, sibling, order):
    if h1 == -1:
        return h2
    if h2 == -1:
        return h1
    if order[h1] <= order[h2]:
        head = h1
        h1 = sibling[h1]
    else:
        head = h2
        h2 = sibling[h2]
    tail = head
    while h1 != -1 and h2 != -1:
        if order[h1] <= order[h2]:
            sibling[tail] = h1
            tail = h1
            h1 = sibling[h1]
        else:
            sibling[tail] = h2
            tail = h2
            h2 = sibling[h2]
    sibling[tail] = h1 if h1 != -1 else h2
    return head


@njit(cache=True)
def hp_meld(h1, h2, key, child, sibling, order):
    """Meld two heaps; returns ``(head, comparisons)``."""
    head = hp_merge_lists(h1, h2, sibling, order)
    if head == -1:
        return head, 0
    ncmp = 0
    prev = -1
    x = head
    nxt = sibling[x]
    while nxt != -1:
        if order[x] != order[nxt] or (
            sibling[nxt] != -1 and order[sibling[nxt]] == order[x]
        ):
            prev = x
            x = nxt
        else:
            ncmp += 1
            if key[x] <= key[nxt]:
                sibling[x] = sibling[nxt]
                hp_link(nxt, x, child, sibling, order)
            else:
                if prev == -1:
                    head = nxt
                else:
                    sibling[prev] = nxt
                hp_link(x, nxt, child, sibling, order)
                x = nxt
        nxt = sibling[x]
    return head, ncmp


@njit(cache=True)
def hp_insert(h, x, key, child, sibling, order):
    hp_reset(x, child, sibling, order)
    return hp_meld(h, x, key, child, sibling, order)


@njit(cache=True)
def hp_min(h, key, sibling):
    """Minimum root; returns ``(node, comparisons)``, node ``-1`` if empty."""
    best = h
    ncmp = 0
    if h == -1:
        return best, ncmp
    x = sibling[h]
    while x != -1:
        ncmp += 1
        if key[x] < key[best]:
            best = x
        x = sibling[x]
    return best, ncmp


@njit(cache=True)
def hp_delete_min(h, key, child, sibling, order):
    """Remove the minimum; returns ``(head, node, comparisons)``."""
    best, ncmp = hp_min(h, key, sibling)
    if best == -1:
        return h, -1, ncmp
    prev = -1
    x = h
    while x != best:
        prev = x
        x = sibling[x]
    if prev == -1:
        h = sibling[best]
    else:
        sibling[prev] = sibling[best]
    # children are stored by decreasing order; reverse into a root list
    rev = -1
    c = child[best]
    while c != -1:
        nxt = sibling[c]
        sibling[c] = rev
        rev = c
        c = nxt
    hp_reset(best, child, sibling, order)
    h, k = hp_meld(h, rev, key, child, sibling, order)
    return h, best, ncmp + k


@njit(cache=True)
def hp_filter(h, size, pivot, key, child, sibling, order, out):
    """Remove every node with ``key < pivot``.

    Removed nodes go to ``out[:k]`` in no particular order. Orphaned subtrees
    are bucketed by order and relinked so that at most one tree per order
    remains. Returns ``(head, k, comparisons)``.
    """
    if h == -1:
        return h, 0, 0
    stack = np.empty(size + 1, np.int64)
    top = 0
    x = h
    while x != -1:
        stack[top] = x
        top += 1
        x = sibling[x]
    bucket = np.full(MAX_ORDER, -1, np.int64)
    k = 0
    ncmp = 0
    while top > 0:
        top -= 1
        x = stack[top]
        ncmp += 1
        if key[x] < pivot:
            out[k] = x
            k += 1
            c = child[x]
            while c != -1:
                nxt = sibling[c]
                stack[top] = c
                top += 1
                c = nxt
            hp_reset(x, child, sibling, order)
        else:
            d = order[x]
            sibling[x] = bucket[d]
            bucket[d] = x
    if k == 0:
        # nothing removed: restore the original root list order
        head = -1
        for d in range(MAX_ORDER - 1, -1, -1):
            x = bucket[d]
            if x != -1:
                sibling[x] = head
                head = x
        return head, 0, ncmp
    head = -1
    tail = -1
    for d in range(MAX_ORDER - 1):
        x = bucket[d]
        while x != -1 and sibling[x] != -1:
            a = x
            b = sibling[a]
            x = sibling[b]
            ncmp += 1
            if key[a] < key[b]:
                hp_link(b, a, child, sibling, order)
                r = a
            else:
                hp_link(a, b, child, sibling, order)
                r = b
            sibling[r] = bucket[d + 1]
            bucket[d + 1] = r
        if x != -1:
            sibling[x] = -1
            if tail == -1:
                head = x
            else:
                sibling[tail] = x
            tail = x
    return head, k, ncmp


@njit(cache=True)
def hp_filter_and_insert(h, size, x, key, child, sibling, order, out):
    """Insert ``x`` then drop everything ranked below it."""
    h, c1 = hp_insert(h, x, key, child, sibling, order)
    h, k, c2 = hp_filter(h, size + 1, key[x], key, child, sibling, order, out)
    return h, k, c1 + c2


@njit(cache=True)
def hp_collect(h, size, child, sibling, out):
    """Write every node of the heap into ``out[:size]`` (any order)."""
    stack = np.empty(size + 1, np.int64)
    top = 0
    k = 0
    x = h
    while x != -1:
        stack[top] = x
        top += 1
        x = sibling[x]
    while top > 0:
        top -= 1
        x = stack[top]
        out[k] = x
        k += 1
        c = child[x]
        while c != -1:
            stack[top] = c
            top += 1
            c = sibling[c]
    return k


# ---------------------------------------------------------------------------
# Python-facing handles


class HeapPool:
    """Node storage shared by a family of :class:`EdgeHeap` handles.

    ``rank[e]`` is the key of element ``e``; elements are ``0..len(rank)-1``.
    """

    def __init__(self, rank):
        self.key = np.ascontiguousarray(rank, dtype=np.int64)
        m = self.key.size
        self.child = np.full(m, -1, np.int64)
        self.sibling = np.full(m, -1, np.int64)
        self.order = np.zeros(m, np.int64)
        self.member = np.zeros(m, np.bool_)
        self.comparisons = 0
        self._scratch = np.empty(m, np.int64)

    def empty(self) -> "EdgeHeap":
        return EdgeHeap(self, -1, 0)

    def heap_of(self, items) -> "EdgeHeap":
        h = self.empty()
        for e in items:
            h = insert(h, int(e))
        return h


class EdgeHeap:
    """Handle to one binomial heap in a :class:`HeapPool`."""

    __slots__ = ("pool", "head", "size", "_live")

    def __init__(self, pool: HeapPool, head: int, size: int):
        self.pool = pool
        self.head = int(head)
        self.size = int(size)
        self._live = True

    def __len__(self) -> int:
        self._check()
        return self.size

    def __repr__(self) -> str:
        state = "" if self._live else " consumed"
        return f"<EdgeHeap size={self.size}{state}>"

    def _check(self):
        if not self._live:
            raise RuntimeError("this heap handle was consumed by an earlier operation")

    def _consume(self):
        self._check()
        self._live = False

    def items(self) -> list[int]:
        self._check()
        p = self.pool
        k = hp_collect(self.head, self.size, p.child, p.sibling, p._scratch)
        return p._scratch[:k].tolist()

    def min(self) -> int:
        self._check()
        if self.size == 0:
            raise IndexError("min of an empty heap")
        p = self.pool
        x, ncmp = hp_min(self.head, p.key, p.sibling)
        p.comparisons += ncmp
        return int(x)


def insert(h: EdgeHeap, e: int) -> EdgeHeap:
    p = h.pool
    if p.member[e]:
        raise ValueError(f"edge {e} is already stored in a heap of this pool")
    h._consume()
    head, ncmp = hp_insert(h.head, e, p.key, p.child, p.sibling, p.order)
    p.member[e] = True
    p.comparisons += ncmp
    return EdgeHeap(p, head, h.size + 1)


def delete_min(h: EdgeHeap) -> tuple[EdgeHeap, int]:
    if h.size == 0:
        h._check()
        raise IndexError("delete_min on an empty heap")
    p = h.pool
    h._consume()
    head, x, ncmp = hp_delete_min(h.head, p.key, p.child, p.sibling, p.order)
    p.member[x] = False
    p.comparisons += ncmp
    return EdgeHeap(p, head, h.size - 1), int(x)


def meld(h1: EdgeHeap, h2: EdgeHeap) -> EdgeHeap:
    if h1.pool is not h2.pool:
        raise ValueError("cannot meld heaps from different pools")
    if h1 is h2:
        raise ValueError("cannot meld a heap with itself")
    p = h1.pool
    h1._consume()
    h2._consume()
    head, ncmp = hp_meld(h1.head, h2.head, p.key, p.child, p.sibling, p.order)
    p.comparisons += ncmp
    return EdgeHeap(p, head, h1.size + h2.size)


def filter(h: EdgeHeap, pivot: int) -> tuple[np.ndarray, EdgeHeap]:  # noqa: A001
    """Split off every element ranked below ``pivot``.

    Returns ``(S, rest)``; ``S`` is unsorted.
    """
    p = h.pool
    h._consume()
    out = np.empty(h.size, np.int64)
    head, k, ncmp = hp_filter(
        h.head, h.size, p.key[pivot], p.key, p.child, p.sibling, p.order, out
    )
    s = out[:k].copy()
    p.member[s] = False
    p.comparisons += ncmp
    return s, EdgeHeap(p, head, h.size - k)


def filter_and_insert(h: EdgeHeap, e: int) -> tuple[np.ndarray, EdgeHeap]:
    """Insert ``e``, then filter with ``e`` as the pivot; ``e`` stays in the heap."""
    return filter(insert(h, e), e)


def validate_heap(h: EdgeHeap) -> Violation | None:
    """Check binomial shape, heap order, one tree per order and the size."""
    h._check()
    p = h.pool
    key, child, sibling, order = p.key, p.child, p.sibling, p.order
    seen: set[int] = set()
    count = 0
    last = -1
    root = h.head
    while root != -1:
        if root in seen:
            return Violation("duplicate", root, f"node {root} reached twice")
        if order[root] <= last:
            return Violation(
                "structure", root, f"root {root} has order {order[root]} after order {last}"
            )
        last = order[root]
        stack = [root]
        while stack:
            x = stack.pop()
            if x in seen and x != root:
                return Violation("duplicate", x, f"node {x} reached twice")
            seen.add(x)
            count += 1
            expect = order[x] - 1
            c = child[x]
            while c != -1:
                if c in seen:
                    return Violation("duplicate", c, f"node {c} reached twice")
                if order[c] != expect:
                    return Violation(
                        "structure", c, f"child {c} of {x} has order {order[c]}, expected {expect}"
                    )
                if key[c] < key[x]:
                    return Violation(
                        "heap-order", c, f"child {c} (key {key[c]}) under {x} (key {key[x]})"
                    )
                stack.append(c)
                expect -= 1
                c = sibling[c]
            if expect != -1:
                return Violation("structure", x, f"node {x} of order {order[x]} is missing children")
        root = sibling[root]
    if count != h.size:
        return Violation("size", count, f"heap holds {count} nodes but records size {h.size}")
    return None
