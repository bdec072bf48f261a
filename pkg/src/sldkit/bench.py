"""Timed runs of the builders and the benchmark sweep behind ``sld bench``."""

from __future__ import annotations

import csv
import json
import os
import statistics
import time
from pathlib import Path

from .algo_paruf import paruf_build
from .algo_rctt import rctt_build
from .algo_tc import tc_build
from .core import Dendrogram, WeightedTree, compute_ranks, dendrogram_height
from .gen import make_input
from .io import read_tree
from .oracle import sequf_build
from .parallel import max_threads, threads

SCHEMA_VERSION = 1
ALGOS = ("sequf", "tc", "paruf", "rctt")
# phase that absorbs the rank computation, per algorithm
_RANK_PHASE = {"sequf": "sort", "tc": "build", "paruf": "preprocess", "rctt": "build"}


def run_algorithm(
    t: WeightedTree,
    algo: str,
    n_threads: int | None = None,
    seed: int = 0,
    postprocess: bool = True,
) -> tuple[Dendrogram, dict]:
    """Compute ranks and the dendrogram; return it with a stats record.

    The stats hold ``wall_ms`` (ranks included), ``phases_ms`` and
    ``counters``. Ranks are charged to the algorithm's first phase.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
    raw: dict = {}
    with threads(n_threads) as k:
        t0 = time.perf_counter()
        r = compute_ranks(t)
        t1 = time.perf_counter()
        if algo == "sequf":
            d = sequf_build(t, r)
            raw["phases"] = {"merge": time.perf_counter() - t1}
        elif algo == "tc":
            d = tc_build(t, r, seed=seed, stats=raw)
        elif algo == "paruf":
            d = paruf_build(t, r, postprocess=postprocess, stats=raw)
        else:
            d = rctt_build(t, r, seed=seed, stats=raw)
        t2 = time.perf_counter()
    phases = {_RANK_PHASE[algo]: t1 - t0}
    for name, sec in raw.get("phases", {}).items():
        phases[name] = phases.get(name, 0.0) + sec
    stats = {
        "algo": algo,
        "n": t.n,
        "threads": k,
        "wall_ms": 1e3 * (t2 - t0),
        "phases_ms": {name: 1e3 * sec for name, sec in phases.items()},
        "counters": dict(raw.get("counters", {})),
    }
    return d, stats


def load_config(path) -> dict:
    cfg = json.loads(Path(path).read_text())
    if not isinstance(cfg, dict) or "inputs" not in cfg:
        raise ValueError(f"{path}: config needs an 'inputs' list")
    cfg.setdefault("algos", list(ALGOS))
    cfg.setdefault("threads", [1, max_threads()])
    cfg.setdefault("reps", 3)
    cfg.setdefault("seed", 0)
    for a in cfg["algos"]:
        if a not in ALGOS:
            raise ValueError(f"{path}: unknown algorithm {a!r}")
    return cfg


def _input_tree(spec: dict, base: Path) -> tuple[str, WeightedTree]:
    if "file" in spec:
        p = Path(spec["file"])
        return spec.get("name", p.stem), read_tree(p if p.is_absolute() else base / p)
    t = make_input(spec["kind"], int(spec["n"]), spec.get("weights", "unit"), int(spec.get("seed", 0)))
    name = spec.get("name", f"{spec['kind']}-{spec.get('weights', 'unit')}-{spec['n']}")
    return name, t


def _cell(name, t, algo, k, reps, seed) -> dict:
    times, phases, counters, height = [], [], {}, None
    for _ in range(reps):
        d, st = run_algorithm(t, algo, k, seed)
        times.append(st["wall_ms"])
        phases.append(st["phases_ms"])
        counters = st["counters"]
        if height is None:
            height = dendrogram_height(d)
    return {
        "schema_version": SCHEMA_VERSION,
        "input": name,
        "algo": algo,
        "threads": st["threads"],
        "n": t.n,
        "rep_times_ms": times,
        "median_ms": statistics.median(times),
        "phases": {p: statistics.median(ph[p] for ph in phases) for p in phases[0]},
        "counters": counters,
        "height": height,
    }


def run_bench(cfg: dict, base=".", log=None) -> list[dict]:
    """Run every (input, algo, threads) cell of ``cfg``; returns the cell records."""
    base = Path(base)
    cells = []
    for spec in cfg["inputs"]:
        name, t = _input_tree(spec, base)
        base_cell = _cell(name, t, "sequf", 1, cfg["reps"], cfg["seed"])
        ref = base_cell["median_ms"]
        for algo in cfg["algos"]:
            rows = []
            for k in cfg["threads"]:
                c = base_cell if (algo == "sequf" and k == 1) else _cell(name, t, algo, k, cfg["reps"], cfg["seed"])
                c = dict(c)
                rows.append(c)
                if log:
                    log(f"{name} {algo} threads={c['threads']} median={c['median_ms']:.1f}ms")
            one = rows[0]["median_ms"]
            for c in rows:
                c["speedup_vs_sequf"] = ref / c["median_ms"] if c["median_ms"] else float("nan")
                c["self_speedup"] = one / c["median_ms"] if c["median_ms"] else float("nan")
            cells.extend(rows)
    return cells


def write_results(cells: list[dict], out, csv_out=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "host": {"cpu_count": os.cpu_count(), "max_threads": max_threads()},
        "cells": cells,
    }
    Path(out).write_text(json.dumps(doc, indent=2) + "\n")
    if csv_out:
        write_csv(cells, csv_out)


def write_csv(cells: list[dict], path) -> None:
    """Flatten cell records: nested phases/counters become ``phase_*``/``counter_*`` columns."""
    rows = []
    for c in cells:
        row = {k: v for k, v in c.items() if k not in ("phases", "counters", "rep_times_ms")}
        row.update({f"phase_{k}_ms": v for k, v in c["phases"].items()})
        row.update({f"counter_{k}": v for k, v in c["counters"].items()})
        rows.append(row)
    fields: list[str] = []
    for row in rows:
        fields += [k for k in row if k not in fields]
    with Path(path).open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
