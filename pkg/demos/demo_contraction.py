"""
Tree contraction and the RC-tree
=================================

Contract a random tree and look at how each edge gets protected.
"""

import numpy as np

import sldkit
from sldkit.algo_rctt import trace_edge
from sldkit.contraction import COMPRESS, RAKE

t = sldkit.apply_weights(sldkit.gen_knuth(2000, seed=1), "perm", seed=1)
r = sldkit.compute_ranks(t)

# every round rakes leaves and compresses an independent set of degree-2 vertices
rct = sldkit.contract(t, r, seed=0)
print(f"rounds: {rct.rounds}, RC-tree height: {rct.height()}, bound: {sldkit.contraction.round_bound(t.n)}")
print("rakes:", int((rct.kind == RAKE).sum()), "compresses:", int((rct.kind == COMPRESS).sum()))
assert sldkit.validate_rctree(rct, t, r) is None

# an edge climbs the RC-tree until it meets a larger edge; that rcnode is its bucket
e = int(r.order[0])
print(f"cheapest edge {e} is protected at rcnode {trace_edge(rct, e, r)}")

# both contraction-based builders use the same schedule and the same sites
a, b = {}, {}
sldkit.rctt_build(t, r, rct=rct, stats=a)
sldkit.tc_build(t, r, rct=rct, stats=b)
print("sites agree:", np.array_equal(a["protect_site"], b["filter_site"]))
print("longest trace:", a["counters"]["trace_max"])
print("tc comparisons per edge:", round(b["counters"]["comparisons"] / t.m, 2))
