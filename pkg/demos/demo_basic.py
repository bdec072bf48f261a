"""
Single-linkage dendrogram of a small tree
==========================================

Build a weighted tree, compute its dendrogram with every builder and check
they agree.
"""

import numpy as np

import sldkit
from sldkit import io

# a tree on 7 vertices; weights tie on purpose, ties break by endpoint ids
t = sldkit.WeightedTree.from_edges(
    7,
    [(0, 1, 3.0), (1, 2, 1.0), (1, 3, 2.0), (3, 4, 1.0), (3, 5, 5.0), (5, 6, 2.0)],
)
r = sldkit.compute_ranks(t)
print("edge order by rank:", r.order.tolist())

# each node of the dendrogram is an edge; its parent is the next merge above it
ref = sldkit.brute_force_sld(t, r)
print("parent array:", ref.parent.tolist())
print("height:", sldkit.dendrogram_height(ref))

for name, build in sldkit.ALGORITHMS.items():
    d = build(t, r)
    print(f"{name:>6}: {'same' if d == ref else 'DIFFERENT'}")

# the spine of the cheapest edge runs all the way to the root
print("spine of edge 1:", ref.spine(1))

# DOT output, render with `dot -Tpng`
print(io.to_dot(ref, t, r))

# a graph reduces to its minimum spanning tree first
g = sldkit.mst_reduce(4, np.array([0, 1, 2, 3, 0]), np.array([1, 2, 3, 0, 2]), np.array([4.0, 1.0, 2.0, 3.0, 9.0]))
print("MST edges:", list(g.edges()))
