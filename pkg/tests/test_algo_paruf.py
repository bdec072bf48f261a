import numpy as np
import pytest
from hypothesis import given, strategies as st

from sldkit import (
    ROOT,
    WeightedTree,
    apply_weights,
    brute_force_sld,
    compute_ranks,
    gen_knuth,
    gen_path,
    gen_star,
    paruf_build,
    threads,
)
from sldkit.algo_paruf import INACTIVE, READY, ParUFState, cas_race, initial_status
from sldkit.parallel import max_threads

from conftest import random_tree, relabel


def path(ws):
    return WeightedTree.from_edges(len(ws) + 1, [(i, i + 1, w) for i, w in enumerate(ws)])


def test_initial_status_examples():
    t = path([2, 1, 3])
    r = compute_ranks(t)
    assert initial_status(t, r).tolist() == [1, 2, 1]
    assert ParUFState(t, r).status.tolist() == [1, 2, 1]
    t = path([5])
    assert initial_status(t, compute_ranks(t)).tolist() == [2]
    t = path([1, 2])
    assert initial_status(t, compute_ranks(t)).tolist() == [2, 1]
    t = apply_weights(gen_star(7), "perm", 3)
    r = compute_ranks(t)
    s = initial_status(t, r)
    assert s[r.order[0]] == 2
    assert (np.delete(s, r.order[0]) == 1).all()


def test_merge_chain_step():
    t = path([1, 2, 3])
    s = ParUFState(t, compute_ranks(t))
    assert s.claim(0)
    nxt = s.merge_chain_step(0)
    assert s.parent[0] == 1
    # edge 1 went 1 -> 2 and was claimed for the next step
    assert nxt == 1 and s.status[1] == INACTIVE
    nxt = s.merge_chain_step(1)
    assert nxt == 2
    assert s.merge_chain_step(2) is None
    assert s.parent.tolist() == [1, 2, ROOT]


def test_step_on_non_minimum_is_refused():
    t = path([1, 2, 3])
    s = ParUFState(t, compute_ranks(t))
    with pytest.raises(RuntimeError):
        s.merge_chain_step(1)


def test_postprocess_tail():
    t = path(list(range(12)))
    s = ParUFState(t, compute_ranks(t))
    s.postprocess_tail([10, 4, 7])
    assert s.parent[4] == 7 and s.parent[7] == 10 and s.parent[10] == ROOT
    s.postprocess_tail([3])
    assert s.parent[3] == ROOT


@given(st.integers(2, 60), st.integers(0, 2**31))
def test_each_merge_takes_the_local_minimum(n, seed):
    # check every step against explicit cluster scans
    rng = np.random.default_rng(seed)
    t = random_tree(rng, n)
    r = compute_ranks(t)
    s = ParUFState(t, r)
    cluster = list(range(n))
    rank = r.rank
    for e in range(t.m):
        cur = e if s.claim(e) else None
        while cur is not None:
            a, b = cluster[t.u[cur]], cluster[t.v[cur]]
            touching = [f for f in range(t.m) if s.parent[f] == ROOT and f != cur and f not in done(s, t)
                        and {cluster[t.u[f]], cluster[t.v[f]]} & {a, b}]
            assert all(rank[cur] < rank[f] for f in touching)
            nxt = s.merge_chain_step(cur)
            cluster = [a if c == b else c for c in cluster]
            if touching:
                assert s.parent[cur] == min(touching, key=lambda f: rank[f])
            cur = nxt
    assert s.run() == brute_force_sld(t, r)


def done(s, t):
    return {f for f in range(t.m) if s.status[f] == INACTIVE}


@given(st.integers(2, 3000), st.integers(0, 2**31), st.booleans())
def test_matches_brute_force(n, seed, post):
    rng = np.random.default_rng(seed)
    t = relabel(random_tree(rng, n), rng)
    r = compute_ranks(t)
    assert paruf_build(t, r, postprocess=post, jitter_seed=seed) == brute_force_sld(t, r)


def test_star_stops_after_one_merge():
    t = apply_weights(gen_star(5000), "perm", 1)
    r = compute_ranks(t)
    st_ = {}
    assert paruf_build(t, r, stats=st_) == brute_force_sld(t, r)
    c = st_["counters"]
    assert c["async_steps"] == 1 and c["merged_at_trigger"] == 1
    assert c["postprocessed"] == t.m - 1


def test_knuth_unit_is_mostly_postprocess():
    t = gen_knuth(100_000, 4)
    r = compute_ranks(t)
    st_ = {}
    assert paruf_build(t, r, stats=st_) == brute_force_sld(t, r)
    assert st_["counters"]["postprocessed"] >= 0.9 * t.m


def test_every_edge_finishes_inactive_without_postprocess(rng):
    t = random_tree(rng, 2000)
    r = compute_ranks(t)
    st_ = {}
    d = paruf_build(t, r, postprocess=False, stats=st_)
    assert st_["counters"]["postprocessed"] == 0
    assert st_["counters"]["async_steps"] == t.m
    assert d == brute_force_sld(t, r)


def test_cas_race_has_one_winner():
    wins = cas_race(10_000, max(4, max_threads()))
    assert (wins == 1).all()


@pytest.mark.parametrize("k", [1, 2, 3, 8])
def test_thread_counts_and_jitter(k, rng):
    t = random_tree(rng, 20_000, "knuth", "perm")
    r = compute_ranks(t)
    ref = brute_force_sld(t, r)
    with threads(k):
        for j in range(3):
            assert paruf_build(t, r, jitter_seed=j) == ref
            assert paruf_build(t, r, postprocess=False, jitter_seed=j) == ref


def test_low_par_keeps_two_minima():
    t = apply_weights(gen_path(400), "low-par")
    r = compute_ranks(t)
    s = ParUFState(t, r)
    ready = lambda: int((s.status == READY).sum())  # noqa: E731
    assert ready() == 2
    for e in range(t.m):
        cur = e if s.claim(e) else None
        while cur is not None:
            assert ready() <= 2
            cur = s.merge_chain_step(cur)
    assert s.run() == brute_force_sld(t, r)
