"""
How edge weights steer the union-find builder
==============================================

The asynchronous union-find builder only merges local minima. Some weight
schemes leave plenty of them, others leave two.
"""

import sldkit

n = 200_000
inputs = {
    "path perm": sldkit.apply_weights(sldkit.gen_path(n), "perm", seed=0),
    "path low-par": sldkit.apply_weights(sldkit.gen_path(n), "low-par"),
    "knuth unit": sldkit.gen_knuth(n, seed=0),
    "star perm": sldkit.apply_weights(sldkit.gen_star(n), "perm", seed=0),
}

print(f"{'input':>14} {'chains':>8} {'longest':>8} {'postprocessed':>14}")
for name, t in inputs.items():
    r = sldkit.compute_ranks(t)
    st = {}
    d = sldkit.paruf_build(t, r, stats=st)
    assert d == sldkit.sequf_build(t, r)
    c = st["counters"]
    print(f"{name:>14} {c['chains']:>8} {c['longest_chain']:>8} {c['postprocessed']:>14}")

# low-par rises then falls, so two chains each walk half the path;
# on a star the first merge leaves one minimum and the rest is a sort
