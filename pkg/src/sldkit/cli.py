"""``sld`` command line: gen, run, verify, bench.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, gen, io
from .contraction import contract, validate_rctree
from .core import ROOT, Dendrogram, WeightedTree, compute_ranks, dendrogram_height, validate_dendrogram, validate_tree
from .oracle import brute_force_sld, suboptimal_tree_contraction_sld
from .parallel import THREADS_ENV, default_threads

log = logging.getLogger("sldkit")

VERIFY_CAP = 100_000
SUBOPTIMAL_VERIFY_CAP = 10_000


class UsageError(Exception):
    pass


def _components(t: WeightedTree, split: bool):
    """Yield ``(vertex_ids, edge_ids, tree)``; the whole input unless ``split``."""
    if not split:
        v = validate_tree(t)
        if v is not None:
            raise UsageError(f"invalid tree: {v}")
        return [(np.arange(t.n), np.arange(t.m), t)]
    parts = gen.split_forest(t.n, t.u, t.v, t.w)
    for _, _, c in parts:
        v = validate_tree(c)
        if v is not None:
            raise UsageError(f"invalid component: {v}")
    return parts


def _load(path, graph: bool) -> WeightedTree:
    if graph:
        return gen.mst_reduce(*io.read_graph(path))
    return io.read_tree(path)


# ---------------------------------------------------------------------------


def cmd_gen(a) -> int:
    if a.kind == "star-forest" and a.h is None:
        raise UsageError("--kind star-forest needs --h")
    t = gen.make_input(a.kind, a.n, a.weights, a.seed, a.h)
    io.write_tree(a.out, t, binary=a.binary)
    log.info("wrote %s: n=%d, %d edges", a.out, t.n, t.m)
    return 0


def cmd_run(a) -> int:
    t = _load(a.input, a.graph)
    parts = _components(t, a.components)
    parent = np.full(t.m, ROOT, np.int64)
    stats = []
    for _, es, c in parts:
        d, st = bench.run_algorithm(c, a.algo, a.threads, a.seed)
        parent[es] = np.where(d.parent >= 0, es[np.maximum(d.parent, 0)], ROOT)
        st["height"] = dendrogram_height(d)
        stats.append(st)
    out = Dendrogram(parent)
    if a.out:
        io.write_dendrogram(a.out, out)
    else:
        sys.stdout.write(io.format_dendrogram(out))
    if a.stats:
        doc = {"schema_version": bench.SCHEMA_VERSION, "input": str(a.input), "components": stats}
        if len(stats) == 1:
            doc.update(stats[0])
            del doc["components"]
        Path(a.stats).write_text(json.dumps(doc, indent=2) + "\n")
    if a.dot:
        Path(a.dot).write_text(io.to_dot(out, t, compute_ranks(t) if not a.components else None))
    for st in stats:
        log.info(
            "%s n=%d threads=%d wall=%.1fms h=%d", st["algo"], st["n"], st["threads"], st["wall_ms"], st["height"]
        )
    return 0


def _fault(d: Dendrogram) -> Dendrogram:
    # test hook: corrupt one parent pointer
    p = d.parent.copy()
    p[0] = ROOT if p[0] != ROOT else (1 if p.size > 1 else 0)
    return Dendrogram(p)


def verify_tree(t: WeightedTree, seed: int = 0, fault: str | None = None, n_threads=None) -> list[tuple[str, bool, str]]:
    """Run every builder and validator on ``t``; returns ``(check, ok, detail)`` rows."""
    rows = []
    v = validate_tree(t)
    rows.append(("validate_tree", v is None, str(v or "")))
    if v is not None:
        return rows
    r = compute_ranks(t)
    ref = brute_force_sld(t, r)
    v = validate_dendrogram(ref, r)
    rows.append(("validate_dendrogram brute_force", v is None, str(v or "")))
    rct = contract(t, r, seed)
    v = validate_rctree(rct, t, r)
    rows.append(("validate_rctree", v is None, str(v or "")))
    outs = {}
    for algo in bench.ALGOS:
        outs[algo] = bench.run_algorithm(t, algo, n_threads, seed)[0]
    if t.n <= SUBOPTIMAL_VERIFY_CAP:
        outs["suboptimal"] = suboptimal_tree_contraction_sld(t, r, seed)
    if fault is not None:
        outs[fault] = _fault(outs[fault])
    for name, d in outs.items():
        v = validate_dendrogram(d, r)
        rows.append((f"validate_dendrogram {name}", v is None, str(v or "")))
        diff = np.flatnonzero(d.parent != ref.parent)
        detail = ""
        if diff.size:
            e = int(diff[0])
            detail = f"edge {e}: parent {d.parent[e]}, expected {ref.parent[e]} ({diff.size} edges differ)"
        rows.append((f"{name} == brute_force", diff.size == 0, detail))
    return rows


def cmd_verify(a) -> int:
    t = _load(a.input, a.graph)
    if t.n > a.cap:
        raise UsageError(f"n = {t.n} exceeds the verification cap {a.cap} (raise it with --cap)")
    parts = _components(t, a.components) if a.components else [(None, None, t)]
    ok = True
    for i, (_, _, c) in enumerate(parts):
        tag = f"[component {i}] " if a.components else ""
        for name, good, detail in verify_tree(c, a.seed, a.inject_fault, a.threads):
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} {tag}{name}" + (f": {detail}" if detail else ""))
    print("verification passed" if ok else "verification FAILED")
    return 0 if ok else 1


def cmd_bench(a) -> int:
    cfg = bench.load_config(a.config)
    cells = bench.run_bench(cfg, base=Path(a.config).parent, log=log.info)
    bench.write_results(cells, a.out, a.csv)
    log.info("wrote %d cells to %s", len(cells), a.out)
    return 0


# ---------------------------------------------------------------------------


def _positive(s: str) -> int:
    k = int(s)
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sld", description="Single-linkage dendrograms of weighted trees.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate an input tree")
    g.add_argument("--kind", choices=gen.KINDS, required=True)
    g.add_argument("--n", type=_positive, required=True)
    g.add_argument("--h", type=_positive, help="star size for star-forest")
    g.add_argument("--weights", choices=gen.WEIGHT_SCHEMES, default="unit")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--binary", action="store_true", help="write the binary format")
    g.set_defaults(func=cmd_gen)

    thr = dict(type=_positive, default=None, help=f"worker threads (default: ${THREADS_ENV} or all cores)")

    r = sub.add_parser("run", help="compute a dendrogram")
    r.add_argument("input")
    r.add_argument("--algo", choices=bench.ALGOS, default="rctt")
    r.add_argument("--threads", **thr)
    r.add_argument("--seed", type=int, default=0, help="contraction seed")
    r.add_argument("--out", help="dendrogram file (default: stdout)")
    r.add_argument("--stats", help="write run statistics as JSON")
    r.add_argument("--dot", help="write the dendrogram as DOT (small inputs only)")
    r.add_argument("--components", action="store_true", help="accept a forest and solve each tree")
    r.add_argument("--graph", action="store_true", help="input is a weighted graph; reduce to its MST first")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="cross-check all builders against brute force")
    v.add_argument("input")
    v.add_argument("--cap", type=_positive, default=VERIFY_CAP)
    v.add_argument("--threads", **thr)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--components", action="store_true")
    v.add_argument("--graph", action="store_true")
    v.add_argument("--inject-fault", choices=(*bench.ALGOS, "suboptimal"), help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark sweep from a JSON config")
    b.add_argument("config")
    b.add_argument("--out", default="bench.json")
    b.add_argument("--csv", help="also write a flattened CSV")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    p = build_parser()
    a = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    if getattr(a, "threads", None) is None and hasattr(a, "threads"):
        a.threads = default_threads()
    try:
        return a.func(a)
    except (UsageError, ValueError, OSError) as exc:
        print(f"sld: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
