import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sldkit import gen
from sldkit.core import WeightedTree

settings.register_profile(
    "sld", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("sld")


def random_tree(rng: np.random.Generator, n: int, kind: str = "any", scheme: str = "any") -> WeightedTree:
    """Tree of one of the generator families with shuffled labels and edge order."""
    if kind == "any":
        kind = rng.choice(["path", "star", "knuth", "random"])
    if scheme == "any":
        scheme = rng.choice(["unit", "perm", "low-par"] if kind == "path" else ["unit", "perm"])
    seed = int(rng.integers(2**31))
    if kind == "path":
        t = gen.gen_path(n)
    elif kind == "star":
        t = gen.gen_star(n)
    elif kind == "knuth":
        t = gen.gen_knuth(n, seed)
    else:
        # random graph reduced to its spanning tree
        extra = int(rng.integers(0, 2 * n))
        par = (rng.random(n - 1) * np.arange(1, n)).astype(np.int64)
        u = np.concatenate([par, rng.integers(0, n, extra)])
        v = np.concatenate([np.arange(1, n), rng.integers(0, n, extra)])
        keep = u != v
        w = rng.integers(0, 5, keep.sum()).astype(float)
        t = gen.mst_reduce(n, u[keep], v[keep], w)
        scheme = "keep"
    if scheme != "keep":
        t = gen.apply_weights(t, scheme, seed)
    return t


def relabel(t: WeightedTree, rng) -> WeightedTree:
    """Shuffle vertex ids, edge order and endpoint order."""
    pv = rng.permutation(t.n)
    pe = rng.permutation(t.m)
    flip = rng.random(t.m) < 0.5
    u, v = pv[t.u[pe]], pv[t.v[pe]]
    return WeightedTree(t.n, np.where(flip, v, u), np.where(flip, u, v), t.w[pe])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
