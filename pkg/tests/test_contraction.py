import numpy as np
import pytest
from hypothesis import given, strategies as st

from sldkit import compute_ranks, contract, gen_path, gen_star, rct_path_to_root, threads, validate_rctree
from sldkit.contraction import COMPRESS, RAKE, ROOT_KIND, RCTree, round_bound
from sldkit.core import WeightedTree

from conftest import random_tree, relabel


def test_star_rakes_into_center():
    t = gen_star(9)
    rct = contract(t, compute_ranks(t))
    assert rct.root == 0 and rct.rounds == 1
    assert (rct.kind[1:] == RAKE).all() and (rct.parent[1:] == 0).all() and (rct.round[1:] == 0).all()


def test_two_vertices():
    t = gen_path(2)
    rct = contract(t, compute_ranks(t))
    # of two adjacent leaves the larger id rakes
    assert rct.kind.tolist() == [ROOT_KIND, RAKE]
    assert rct.parent.tolist() == [-1, 0]
    assert rct.edge.tolist() == [-1, 0]


def test_single_vertex():
    t = WeightedTree(1, [], [], [])
    rct = contract(t, compute_ranks(t))
    assert rct.root == 0 and rct.rounds == 0


@given(st.integers(2, 3000), st.integers(0, 2**31))
def test_random_trees_validate(n, seed):
    rng = np.random.default_rng(seed)
    t = relabel(random_tree(rng, n), rng)
    r = compute_ranks(t)
    rct = contract(t, r, seed)
    assert validate_rctree(rct, t, r) is None
    assert rct.rounds <= round_bound(n)


@pytest.mark.parametrize("seed", range(100))
def test_hundred_seeds(seed):
    rng = np.random.default_rng(seed)
    t = random_tree(rng, int(rng.integers(2, 20_000)))
    r = compute_ranks(t)
    assert validate_rctree(contract(t, r, seed), t, r) is None


@pytest.mark.slow
def test_large_validates():
    rng = np.random.default_rng(0)
    t = random_tree(rng, 100_000, "knuth", "perm")
    r = compute_ranks(t)
    assert validate_rctree(contract(t, r, 5), t, r) is None


def _path5():
    t = gen_path(5)
    return t, compute_ranks(t)


def _rct(parent, kind, rnd, edge):
    return RCTree(np.array(parent), np.array(kind), np.array(rnd), np.array(edge), max(rnd))


def test_hand_built_schedule_is_valid():
    t, r = _path5()
    # leaves 0 and 4 rake, 2 compresses across its lesser edge (1,2), then 3 rakes into 1
    good = _rct([1, -1, 1, 1, 3], [RAKE, ROOT_KIND, COMPRESS, RAKE, RAKE], [0, 2, 0, 1, 0], [0, -1, 1, 2, 3])
    assert validate_rctree(good, t, r) is None


def test_compress_toward_greater_rank_is_rejected():
    t, r = _path5()
    bad = _rct([1, -1, 3, 1, 3], [RAKE, ROOT_KIND, COMPRESS, RAKE, RAKE], [0, 2, 0, 1, 0], [0, -1, 2, 1, 3])
    assert validate_rctree(bad, t, r).rule == "compress-direction"


def test_shared_edge_is_rejected():
    t, r = _path5()
    bad = _rct([1, -1, 1, 1, 3], [RAKE, ROOT_KIND, COMPRESS, RAKE, RAKE], [0, 2, 0, 1, 0], [0, -1, 1, 1, 3])
    assert validate_rctree(bad, t, r).rule == "bijection"


def test_adjacent_compresses_are_rejected():
    t = gen_path(6)
    r = compute_ranks(t)
    # 0,5 rake; then 2 and 3 both compress in the same round
    bad = _rct(
        [1, -1, 1, 4, 1, 4],
        [RAKE, ROOT_KIND, COMPRESS, COMPRESS, RAKE, RAKE],
        [0, 2, 0, 0, 1, 0],
        [0, -1, 1, 2, 3, 4],
    )
    assert validate_rctree(bad, t, r).rule == "independence"


def test_path_to_root():
    t = gen_path(2)
    rct = contract(t, compute_ranks(t))
    assert list(rct_path_to_root(rct, 0)) == [(0, -1)]
    assert list(rct_path_to_root(rct, 1)) == [(1, 0), (0, -1)]


def test_path_lengths_bounded(rng):
    t = random_tree(rng, 5000, "knuth", "perm")
    rct = contract(t, compute_ranks(t), 3)
    longest = max(len(list(rct_path_to_root(rct, x))) for x in range(t.n))
    assert longest == rct.height()
    # a vertex can take rakes and then compress within one round
    assert longest <= 2 * rct.rounds + 1
    assert longest <= round_bound(t.n)


def test_clusters_are_connected(rng):
    # the vertices under any rcnode form a connected subtree
    t = random_tree(rng, 400)
    rct = contract(t, compute_ranks(t), 1)
    members = {x: {x} for x in range(t.n)}
    for x in np.argsort(rct.phase(), kind="stable"):
        if rct.parent[x] >= 0:
            members[int(rct.parent[x])] |= members[int(x)]
    for vs in members.values():
        es = [e for e in range(t.m) if t.u[e] in vs and t.v[e] in vs]
        assert len(es) == len(vs) - 1


def test_schedule_ignores_thread_count(rng):
    t = random_tree(rng, 20_000, "knuth", "perm")
    r = compute_ranks(t)
    with threads(1):
        a = contract(t, r, 7)
    with threads(4):
        b = contract(t, r, 7)
    for f in ("parent", "kind", "round", "edge"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_round_bound_over_generators():
    for n in (10, 1000, 100_000):
        for t in (gen_path(n), gen_star(n), random_tree(np.random.default_rng(n), n, "knuth", "perm")):
            assert contract(t, compute_ranks(t)).rounds <= round_bound(n)


def test_dump_format():
    t = gen_path(3)
    lines = contract(t, compute_ranks(t)).dump().splitlines()
    assert len(lines) == 3
    for x, line in enumerate(lines):
        v, kind, rnd, parent, edge = line.split()
        assert int(v) == x and kind in ("rake", "compress", "root")
