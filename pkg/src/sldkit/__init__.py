"""Single-linkage dendrograms of edge-weighted trees.

Four builders produce the same parent array:

* :func:`sequf_build` -- Kruskal-style union-find baseline,
* :func:`tc_build` -- tree contraction with meldable spine heaps,
* :func:`paruf_build` -- asynchronous activation-based union-find,
* :func:`rctt_build` -- RC-tree tracing.

Everything takes a :class:`WeightedTree` and its :class:`RankOrder`.
"""

import os as _os

# numba reads these once at import time; they must be in place before any
# submodule pulls numba in.
_os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
_os.environ.setdefault(
    "NUMBA_NUM_THREADS", str(max(8, _os.cpu_count() or 1))
)

from .core import (  # noqa: E402
    ROOT,
    Dendrogram,
    RankOrder,
    Violation,
    WeightedTree,
    adjacent_inferiors,
    adjacent_superiors,
    compare_edges,
    compute_ranks,
    dendrogram_height,
    validate_dendrogram,
    validate_tree,
)
from .oracle import (  # noqa: E402
    brute_force_sld,
    sequf_build,
    sld_merge_reference,
    suboptimal_tree_contraction_sld,
)
from .contraction import RCTree, contract, rct_path_to_root, validate_rctree  # noqa: E402
from .algo_tc import tc_build  # noqa: E402
from .algo_paruf import paruf_build  # noqa: E402
from .algo_rctt import rctt_build  # noqa: E402
from .parallel import set_threads, threads  # noqa: E402
from .gen import (  # noqa: E402
    apply_weights,
    gen_knuth,
    gen_path,
    gen_star,
    gen_star_forest,
    mst_reduce,
)

ALGORITHMS = {
    "sequf": sequf_build,
    "tc": tc_build,
    "paruf": paruf_build,
    "rctt": rctt_build,
}

__all__ = [
    "ALGORITHMS",
    "apply_weights",
    "gen_knuth",
    "gen_path",
    "gen_star",
    "gen_star_forest",
    "mst_reduce",
    "set_threads",
    "ROOT",
    "Dendrogram",
    "RCTree",
    "RankOrder",
    "Violation",
    "WeightedTree",
    "adjacent_inferiors",
    "adjacent_superiors",
    "brute_force_sld",
    "compare_edges",
    "compute_ranks",
    "contract",
    "dendrogram_height",
    "paruf_build",
    "rct_path_to_root",
    "rctt_build",
    "sequf_build",
    "sld_merge_reference",
    "suboptimal_tree_contraction_sld",
    "tc_build",
    "threads",
    "validate_dendrogram",
    "validate_rctree",
    "validate_tree",
]
