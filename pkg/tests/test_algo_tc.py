import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sldkit import (
    ROOT,
    RankOrder,
    apply_weights,
    brute_force_sld,
    compute_ranks,
    contract,
    dendrogram_height,
    gen_path,
    gen_star,
    tc_build,
    threads,
)
from sldkit.algo_tc import TCState

from conftest import random_tree, relabel

WORK_CONSTANT = 2.0


@given(st.integers(2, 2000), st.integers(0, 2**31))
def test_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    t = relabel(random_tree(rng, n), rng)
    r = compute_ranks(t)
    assert tc_build(t, r, seed=seed) == brute_force_sld(t, r)


def test_two_vertices():
    t = gen_path(2)
    assert tc_build(t, compute_ranks(t)).parent.tolist() == [ROOT]


def test_big_star_protects_everything_at_the_center():
    t = apply_weights(gen_star(10_001), "perm", 2)
    r = compute_ranks(t)
    st_ = {}
    assert tc_build(t, r, stats=st_) == brute_force_sld(t, r)
    assert (st_["filter_site"] == 0).all()


def test_low_par_path():
    t = apply_weights(gen_path(1000), "low-par")
    r = compute_ranks(t)
    assert tc_build(t, r) == brute_force_sld(t, r)


def _state(ranks):
    m = len(ranks)
    t = gen_star(m + 1)
    return TCState(t, RankOrder(np.array(ranks)))


def test_rake_with_empty_heap():
    s = _state([0, 1, 2])
    assert s.rake_step(0, 1, 0).size == 0
    assert s.heaps[0].items() == [0]


def test_rake_filters_below_the_edge():
    # edges 0, 1, 2 have ranks 2, 5, 4
    s = _state([2, 5, 4, 0, 1, 3])
    s.heaps[1] = s.pool.heap_of([0, 1])
    out = s.rake_step(0, 1, 2)
    assert out.tolist() == [0]
    assert s.parent[0] == 2
    assert sorted(s.heaps[0].items()) == [1, 2]


def test_compress_uses_the_lesser_edge():
    # edge 0 rank 1, e1 = edge 1 rank 3, e2 = edge 2 rank 8
    ranks = [1, 3, 8, 0, 2, 4, 5, 6, 7]
    for swap in (False, True):
        s = _state(ranks)
        s.heaps[5] = s.pool.heap_of([0])
        if swap:
            out = s.compress_step(7, 5, 6, 2, 1)
        else:
            out = s.compress_step(6, 5, 7, 1, 2)
        assert out.tolist() == [0] and s.parent[0] == 1
        # the heap travelled across edge 1 to vertex 6
        assert sorted(s.heaps[6].items()) == [1]
        assert s.heaps[7].items() == []


def test_fan_in_reduce():
    s = _state(list(range(8)))
    h = s.fan_in_reduce(0, [(1, 0)])
    assert h.items() == [0]
    s = _state(list(range(8)))
    h = s.fan_in_reduce(0, [(k + 1, k) for k in range(8)])
    assert sorted(h.items()) == list(range(8))
    assert s.parent.tolist() == [ROOT] * 8
    before = sorted(h.items())
    assert sorted(s.fan_in_reduce(0, []).items()) == before


def test_finalize_root():
    s = _state([4, 9, 11] + [0, 1, 2, 3, 5, 6, 7, 8, 10])
    s.heaps[0] = s.pool.heap_of([0, 1, 2])
    s.finalize_root(0)
    assert s.parent[:3].tolist() == [1, 2, ROOT]
    s = _state([0, 1])
    s.heaps[0] = s.pool.heap_of([1])
    s.finalize_root(0)
    assert s.parent[1] == ROOT


@given(st.integers(2, 400), st.integers(0, 2**31))
def test_step_api_replays_the_schedule(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(rng, n)
    r = compute_ranks(t)
    rct = contract(t, r, seed)
    state = TCState(t, r)
    assert state.run(rct) == brute_force_sld(t, r)
    assert (state.writes == 1).all()


@given(st.integers(2, 5000), st.integers(0, 2**31))
def test_single_write_and_heap_bound(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(rng, n)
    r = compute_ranks(t)
    st_ = {}
    d = tc_build(t, r, seed=seed, stats=st_)
    assert (st_["writes"] == 1).all()
    h = dendrogram_height(d)
    assert st_["counters"]["max_heap_size"] <= h
    assert st_["counters"]["comparisons"] <= WORK_CONSTANT * n * math.log2(h + 2)


@pytest.mark.parametrize("kind", ["path", "star", "knuth", "random"])
def test_work_bound_at_scale(kind):
    rng = np.random.default_rng(1)
    t = random_tree(rng, 100_000, kind)
    st_ = {}
    d = tc_build(t, compute_ranks(t), stats=st_)
    h = dendrogram_height(d)
    assert st_["counters"]["comparisons"] <= WORK_CONSTANT * t.n * math.log2(h + 2)


def test_thread_count_does_not_change_output(rng):
    t = random_tree(rng, 50_000, "knuth", "perm")
    r = compute_ranks(t)
    with threads(1):
        a = tc_build(t, r)
    with threads(4):
        b = tc_build(t, r)
    assert a == b
