import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sldkit import (
    Dendrogram,
    apply_weights,
    brute_force_sld,
    compute_ranks,
    dendrogram_height,
    gen_knuth,
    gen_path,
    gen_star,
    validate_dendrogram,
)
from sldkit import io
from sldkit.bench import run_algorithm
from sldkit.cli import main
from sldkit.gen import join_forest

ALGOS = ("sequf", "tc", "paruf", "rctt")


@pytest.mark.parametrize("binary", [False, True])
def test_tree_roundtrip(tmp_path, binary):
    t = apply_weights(gen_knuth(300, 1), "perm", 1).with_weights(np.linspace(0.1, 7.3, 299))
    p = tmp_path / "t"
    io.write_tree(p, t, binary)
    s = io.read_tree(p)
    assert s.n == t.n and np.array_equal(s.u, t.u) and np.array_equal(s.v, t.v) and np.array_equal(s.w, t.w)


def test_bad_files(tmp_path):
    p = tmp_path / "bad"
    for text in ["", "3\n0 1 x\n", "3\n0 1\n", "2.5\n0 1 1\n"]:
        p.write_text(text)
        with pytest.raises(ValueError):
            io.read_tree(p)
    p.write_bytes(io.MAGIC + b"\x02")
    with pytest.raises(ValueError):
        io.read_tree(p)
    p.write_text("3\n5\n0 1 1\n")
    with pytest.raises(ValueError):
        io.read_graph(p)


def test_graph_and_dendrogram_roundtrip(tmp_path):
    io.write_graph(tmp_path / "g", 3, [0, 1, 0], [1, 2, 2], [1.0, 2.0, 3.0])
    n, u, v, w = io.read_graph(tmp_path / "g")
    assert n == 3 and u.tolist() == [0, 1, 0] and w.tolist() == [1, 2, 3]
    d = Dendrogram(np.array([2, 2, -1]))
    io.write_dendrogram(tmp_path / "d", d)
    assert io.read_dendrogram(tmp_path / "d") == d
    assert io.format_dendrogram(d) == "0 2\n1 2\n2 -1\n"


def test_dot():
    t = gen_path(4)
    r = compute_ranks(t)
    text = io.to_dot(brute_force_sld(t, r), t, r)
    assert text.startswith("digraph") and "e0 -> e1;" in text and "e1 -> e2;" in text
    big = gen_star(600)
    with pytest.raises(ValueError):
        io.to_dot(brute_force_sld(big, compute_ranks(big)), big)


def _gen(tmp_path, *args):
    out = tmp_path / f"in{len(list(tmp_path.iterdir()))}.txt"
    assert main(["gen", *args, "--out", str(out)]) == 0
    return out


def test_run_path_height(tmp_path):
    f = _gen(tmp_path, "--kind", "path", "--n", "10")
    out, st = tmp_path / "d.txt", tmp_path / "st.json"
    assert main(["run", str(f), "--algo", "sequf", "--out", str(out), "--stats", str(st)]) == 0
    d = io.read_dendrogram(out)
    assert validate_dendrogram(d, compute_ranks(io.read_tree(f))) is None
    doc = json.loads(st.read_text())
    assert doc["height"] == 9 == dendrogram_height(d)
    assert doc["schema_version"] == 1 and set(doc) >= {"algo", "threads", "wall_ms", "phases_ms", "counters", "n"}


def test_all_algorithms_byte_identical(tmp_path):
    f = _gen(tmp_path, "--kind", "knuth", "--n", "3000", "--weights", "perm", "--seed", "5", "--binary")
    texts = set()
    for a in ALGOS:
        out = tmp_path / f"{a}.txt"
        assert main(["run", str(f), "--algo", a, "--out", str(out)]) == 0
        texts.add(out.read_bytes())
    for k in ("1", "4"):
        out = tmp_path / f"rctt{k}.txt"
        assert main(["run", str(f), "--threads", k, "--out", str(out)]) == 0
        texts.add(out.read_bytes())
    assert len(texts) == 1


def test_run_stdout_dot_and_components(tmp_path, capsys):
    f = tmp_path / "forest.txt"
    trees = [apply_weights(gen_knuth(k, k), "perm", k) for k in (6, 3)]
    io.write_tree(f, join_forest(trees))
    assert main(["run", str(f)]) == 2
    capsys.readouterr()
    dot = tmp_path / "d.dot"
    assert main(["run", str(f), "--components", "--dot", str(dot)]) == 0
    printed = capsys.readouterr().out
    out = tmp_path / "d.txt"
    main(["run", str(f), "--components", "--out", str(out)])
    d = io.read_dendrogram(out)
    assert printed == out.read_text()
    # component 1 holds global edges 5 and 6
    sub = brute_force_sld(trees[1], compute_ranks(trees[1]))
    expect = np.where(sub.parent >= 0, sub.parent + 5, -1)
    assert d.parent[5:].tolist() == expect.tolist()
    assert (d.parent == -1).sum() == 2
    assert "digraph" in dot.read_text()


def test_run_graph_input(tmp_path):
    g = tmp_path / "g.txt"
    io.write_graph(g, 4, [0, 1, 2, 3, 0], [1, 2, 3, 0, 2], [4.0, 1.0, 2.0, 3.0, 9.0])
    out = tmp_path / "d.txt"
    assert main(["run", str(g), "--graph", "--out", str(out)]) == 0
    assert len(io.read_dendrogram(out)) == 3


def test_verify(tmp_path, capsys):
    f = _gen(tmp_path, "--kind", "knuth", "--n", "1000", "--weights", "perm", "--seed", "3")
    assert main(["verify", str(f)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.strip().endswith("verification passed")
    assert main(["verify", str(f), "--inject-fault", "paruf"]) == 1
    out = capsys.readouterr().out
    assert "FAIL paruf == brute_force: edge 0" in out
    f2 = _gen(tmp_path, "--kind", "path", "--n", "2")
    assert main(["verify", str(f2)]) == 0
    capsys.readouterr()
    assert main(["verify", str(f), "--cap", "10"]) == 2


def test_usage_errors(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n0 1 1\n1 1 1\n")
    assert main(["run", str(bad)]) == 2
    assert main(["gen", "--kind", "star-forest", "--n", "8", "--out", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    f = tmp_path / "p.txt"
    io.write_tree(f, gen_path(5))
    res = subprocess.run([sys.executable, "-m", "sldkit", "run", str(f), "--algo", "tc"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout == "0 1\n1 2\n2 3\n3 -1\n"


def test_bench(tmp_path):
    cfg = {
        "inputs": [{"kind": "path", "n": 20000, "weights": "perm", "seed": 1}],
        "algos": ["sequf", "rctt", "paruf"],
        "threads": [1, 2],
        "reps": 2,
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out, csv_out = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["bench", str(tmp_path / "cfg.json"), "--out", str(out), "--csv", str(csv_out)]) == 0
    doc = json.loads(out.read_text())
    cells = doc["cells"]
    assert doc["schema_version"] == 1 and len(cells) == 6
    for c in cells:
        assert set(c) >= {"input", "algo", "threads", "rep_times_ms", "phases", "counters", "height", "n"}
        assert len(c["rep_times_ms"]) == 2 and c["height"] > 0
        assert "speedup_vs_sequf" in c and "self_speedup" in c
    rctt = [c for c in cells if c["algo"] == "rctt"]
    assert set(rctt[0]["phases"]) == {"build", "trace", "sort"}
    rows = list(csv.DictReader(csv_out.open()))
    assert len(rows) == 6 and "phase_trace_ms" in rows[0]


def test_rctt_breakdown_covers_wall_time():
    t = apply_weights(gen_path(200_000), "perm", 1)
    run_algorithm(t, "rctt")
    _, st = run_algorithm(t, "rctt")
    assert sum(st["phases_ms"].values()) >= 0.9 * st["wall_ms"]
    _, st = run_algorithm(t, "sequf", 2)
    assert set(st["phases_ms"]) == {"sort", "merge"}
