"""File formats: trees (text and binary), weighted graphs, dendrograms, DOT."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import Dendrogram, RankOrder, WeightedTree

MAGIC = b"SLDT"
_TRIPLE = np.dtype([("u", "<u4"), ("v", "<u4"), ("w", "<f8")])
DOT_LIMIT = 512


def _numbers(text: str, path) -> np.ndarray:
    try:
        return np.array(text.split(), dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric token ({exc})") from None


def _ids(col: np.ndarray, path, what: str) -> np.ndarray:
    ids = col.astype(np.int64)
    if not np.array_equal(ids, col):
        raise ValueError(f"{path}: {what} must be integers")
    return ids


def read_tree(path) -> WeightedTree:
    """Read a tree in text or binary format (detected by the magic bytes).

    Text: first line ``n``, then one ``u v w`` line per edge. Edge lists
    shorter than ``n - 1`` are accepted here (forests) and rejected later by
    validation.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        if len(raw) < 12 or (len(raw) - 12) % _TRIPLE.itemsize:
            raise ValueError(f"{path}: truncated binary tree")
        (n,) = struct.unpack("<Q", raw[4:12])
        rec = np.frombuffer(raw, dtype=_TRIPLE, offset=12)
        return WeightedTree(int(n), rec["u"].astype(np.int64), rec["v"].astype(np.int64), rec["w"].copy())
    vals = _numbers(raw.decode(), path)
    if vals.size == 0:
        raise ValueError(f"{path}: empty file")
    if (vals.size - 1) % 3:
        raise ValueError(f"{path}: expected 'n' then 'u v w' triples")
    n = _ids(vals[:1], path, "n")[0]
    e = vals[1:].reshape(-1, 3)
    return WeightedTree(int(n), _ids(e[:, 0], path, "vertex ids"), _ids(e[:, 1], path, "vertex ids"), e[:, 2])


def write_tree(path, t: WeightedTree, binary: bool = False) -> None:
    path = Path(path)
    if binary:
        rec = np.empty(t.m, dtype=_TRIPLE)
        rec["u"], rec["v"], rec["w"] = t.u, t.v, t.w
        path.write_bytes(MAGIC + struct.pack("<Q", t.n) + rec.tobytes())
        return
    with path.open("w") as f:
        f.write(f"{t.n}\n")
        f.writelines(f"{a} {b} {w!r}\n" for a, b, w in zip(t.u.tolist(), t.v.tolist(), t.w.tolist()))


def read_graph(path) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Weighted graph: ``n`` on line 1, ``m`` on line 2, then ``m`` lines ``u v w``."""
    path = Path(path)
    vals = _numbers(path.read_text(), path)
    if vals.size < 2:
        raise ValueError(f"{path}: expected 'n' and 'm' header lines")
    n, m = _ids(vals[:2], path, "n and m")
    if vals.size != 2 + 3 * m:
        raise ValueError(f"{path}: header says {m} edges, found {(vals.size - 2) / 3:g}")
    e = vals[2:].reshape(-1, 3)
    return int(n), _ids(e[:, 0], path, "vertex ids"), _ids(e[:, 1], path, "vertex ids"), e[:, 2]


def write_graph(path, n: int, u, v, w) -> None:
    with Path(path).open("w") as f:
        f.write(f"{n}\n{len(u)}\n")
        f.writelines(f"{a} {b} {c!r}\n" for a, b, c in zip(np.asarray(u).tolist(), np.asarray(v).tolist(), np.asarray(w).tolist()))


def format_dendrogram(d: Dendrogram) -> str:
    """``edge_id parent_edge_id`` per line, ``-1`` for the root."""
    return "".join(f"{e} {p}\n" for e, p in enumerate(d.parent.tolist()))


def write_dendrogram(path, d: Dendrogram) -> None:
    Path(path).write_text(format_dendrogram(d))


def read_dendrogram(path) -> Dendrogram:
    path = Path(path)
    vals = _numbers(path.read_text(), path)
    if vals.size % 2:
        raise ValueError(f"{path}: expected 'edge parent' pairs")
    pairs = _ids(vals, path, "edge ids").reshape(-1, 2)
    if not np.array_equal(pairs[:, 0], np.arange(len(pairs))):
        raise ValueError(f"{path}: edge ids must be listed in order 0..m-1")
    return Dendrogram(pairs[:, 1])


def to_dot(d: Dendrogram, t: WeightedTree, r: RankOrder | None = None) -> str:
    """DOT digraph with one node per edge, arrows pointing to the parent."""
    if len(d) + 1 > DOT_LIMIT:
        raise ValueError(f"DOT export is limited to {DOT_LIMIT} vertices")
    lines = ["digraph sld {", "  rankdir=BT;", "  node [shape=box];"]
    for e, (a, b, w) in enumerate(zip(t.u.tolist(), t.v.tolist(), t.w.tolist())):
        rank = f" r={r.rank[e]}" if r is not None else ""
        lines.append(f'  e{e} [label="{e}: ({a},{b}) w={w:g}{rank}"];')
    for e, p in enumerate(d.parent.tolist()):
        if p >= 0:
            lines.append(f"  e{e} -> e{p};")
    lines.append("}")
    return "\n".join(lines) + "\n"
