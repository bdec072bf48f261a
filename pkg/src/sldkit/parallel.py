"""Thread-pool control, atomics and sorting shared by the numba kernels."""

from __future__ import annotations

import contextlib
import logging
import os

import numba
import numpy as np
from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic

log = logging.getLogger(__name__)

THREADS_ENV = "SLD_THREADS"


def max_threads() -> int:
    """Size of the worker pool numba was started with."""
    return numba.config.NUMBA_NUM_THREADS


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, min(int(env), max_threads()))
    return max(1, min(os.cpu_count() or 1, max_threads()))


def set_threads(k: int) -> int:
    """Set the worker count for subsequent parallel kernels on this thread.

    Requests above the pool size are clamped; the effective count is returned.
    """
    k = int(k)
    if k < 1:
        raise ValueError(f"thread count must be positive, got {k}")
    if k > max_threads():
        log.warning("clamping %d threads to pool size %d", k, max_threads())
        k = max_threads()
    numba.set_num_threads(k)
    return k


@contextlib.contextmanager
def threads(k: int | None):
    """Run the enclosed block with ``k`` workers (``None`` keeps the current count)."""
    if k is None:
        yield numba.get_num_threads()
        return
    old = numba.get_num_threads()
    try:
        yield set_threads(k)
    finally:
        numba.set_num_threads(old)


# ---------------------------------------------------------------------------
# atomics on 1-d integer arrays, usable inside njit / prange bodies


def _item_ptr(context, builder, aryty, ary, idx):
    arr = context.make_array(aryty)(context, builder, ary)
    return cgutils.get_item_pointer(context, builder, aryty, arr, [idx])


@intrinsic
def atomic_cas(typingctx, ary, idx, expected, desired):
    """``ary[idx] == expected`` ? store ``desired`` and return True : False."""
    sig = types.boolean(ary, idx, ary.dtype, ary.dtype)

    def codegen(context, builder, signature, args):
        a, i, c, v = args
        ptr = _item_ptr(context, builder, signature.args[0], a, i)
        res = builder.cmpxchg(ptr, c, v, "seq_cst", "seq_cst")
        return builder.extract_value(res, 1)

    return sig, codegen


@intrinsic
def atomic_add(typingctx, ary, idx, val):
    """Add ``val`` to ``ary[idx]``; returns the previous value."""
    sig = ary.dtype(ary, idx, ary.dtype)

    def codegen(context, builder, signature, args):
        a, i, v = args
        ptr = _item_ptr(context, builder, signature.args[0], a, i)
        return builder.atomic_rmw("add", ptr, v, "seq_cst")

    return sig, codegen


@intrinsic
def atomic_xchg(typingctx, ary, idx, val):
    """Store ``val`` into ``ary[idx]``; returns the previous value."""
    sig = ary.dtype(ary, idx, ary.dtype)

    def codegen(context, builder, signature, args):
        a, i, v = args
        ptr = _item_ptr(context, builder, signature.args[0], a, i)
        return builder.atomic_rmw("xchg", ptr, v, "seq_cst")

    return sig, codegen


@njit(inline="always")
def atomic_load(ary, idx):
    return atomic_add(ary, idx, 0)


# ---------------------------------------------------------------------------
# sorting edge ids by rank


@njit(cache=True)
def sort_by_rank(items, rank):
    """Return ``items`` ordered by increasing ``rank[item]``."""
    keys = np.empty(items.size, np.int64)
    for i in range(items.size):
        keys[i] = rank[items[i]]
    return items[np.argsort(keys)]


@njit(cache=True)
def counted_sort_by_rank(items, rank):
    """Bottom-up merge sort of ``items`` by rank.

    Returns ``(sorted_items, comparisons)``; used where work is instrumented.
    """
    n = items.size
    a = items.copy()
    if n < 2:
        return a, 0
    b = np.empty_like(a)
    ncmp = 0
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                ncmp += 1
                if rank[a[i]] < rank[a[j]]:
                    b[k] = a[i]
                    i += 1
                else:
                    b[k] = a[j]
                    j += 1
                k += 1
            while i < mid:
                b[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                b[k] = a[j]
                j += 1
                k += 1
            lo = hi
        a, b = b, a
        width *= 2
    return a, ncmp


@njit(cache=True)
def splitmix64(x):
    """Stateless 64-bit mixer; gives per-(seed, round, vertex) coins."""
    z = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    return z ^ (z >> np.uint64(31))
