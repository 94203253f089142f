import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sparserips.cli import main, sparse_diagram
from sparserips.metric import from_points, write_points
from sparserips.persistence import PersistenceDiagram


@pytest.fixture
def line_file(tmp_path):
    path = tmp_path / "line.csv"
    path.write_text("# four points\n0\n1\n2\n10\n")
    return path


def circle_points(n=30):
    t = 2 * np.pi * np.arange(n) / n
    return np.c_[np.cos(t), np.sin(t)]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_greedy_line(capsys, line_file):
    code, out, _ = run(capsys, "greedy", "--input", line_file, "--k", 4)
    assert code == 0
    assert out.splitlines() == ["index,rad,time", "0,inf,inf", "3,10,125", "2,2,25", "1,1,12.5"]
    code, out, _ = run(capsys, "greedy", "--input", line_file, "--k", 1)
    assert out.splitlines()[1:] == ["0,inf,inf"]


def test_greedy_extend(capsys, tmp_path, line_file):
    part = tmp_path / "part.csv"
    assert run(capsys, "greedy", "--input", line_file, "--k", 2, "--out", part)[0] == 0
    _, extended, _ = run(capsys, "greedy", "--input", line_file, "--k", 4, "--extend", part)
    _, fresh, _ = run(capsys, "greedy", "--input", line_file, "--k", 4)
    assert extended == fresh


def test_sparsify_outputs(capsys, tmp_path, line_file):
    code, out, err = run(capsys, "sparsify", "--input", line_file, "--k", 1)
    assert code == 0 and out.splitlines() == ["alpha,op,simplex", "0,ADD,0"]
    assert json.loads(err)["u"] == 1
    two = tmp_path / "two.csv"
    two.write_text("0\n1\n")
    run(capsys, "sparsify", "--input", two, "--k", 2, "--out", tmp_path / "o")
    stream = (tmp_path / "o" / "stream.csv").read_text().splitlines()
    assert [r.split(",")[1:] for r in stream[1:]] == [["ADD", "0"], ["ADD", "1"], ["ADD", "0-1"],
                                                       ["REMOVE", "0-1"], ["REMOVE", "1"]]
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["u"] == 5 and summary["k"] == 2
    assert (tmp_path / "o" / "critical_events.csv").read_text().startswith("alpha,kind,i,j\n")


def test_sparsify_is_deterministic(capsys, tmp_path):
    for name in ("a", "b"):
        run(capsys, "sparsify", "--generate", 100, "--seed", 7, "--out", tmp_path / name)
    for f in ("stream.csv", "critical_events.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_persist_single_point(capsys, tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("1,2\n")
    code, out, _ = run(capsys, "persist", "--input", p)
    assert code == 0 and out == "dim,birth,death\n0,0,inf\n"


def test_persist_circle(capsys, tmp_path):
    p = tmp_path / "circle.csv"
    write_points(p, circle_points())
    run(capsys, "persist", "--input", p, "--exact", "--out", tmp_path / "exact.csv")
    exact = PersistenceDiagram.from_csv(tmp_path / "exact.csv")
    h1 = exact.in_dim(1)
    assert len(h1) == 1 and h1[0, 1] - h1[0, 0] > 0.5
    assert h1[0, 1] == pytest.approx(math.sqrt(3))
    run(capsys, "persist", "--input", p, "--k", 30, "--epsilon", 0.1, "--out", tmp_path / "sparse.csv")
    code, out, _ = run(capsys, "compare", tmp_path / "sparse.csv", tmp_path / "exact.csv", "--multiplicative", 0.1)
    assert code == 0 and "multiplicative,0.10000000000000001,,true" in out


def test_persist_matches_library(capsys, tmp_path):
    pts = np.random.default_rng(4).random((50, 2))
    p = tmp_path / "pts.csv"
    write_points(p, pts)
    run(capsys, "persist", "--input", p, "--epsilon", 0.2, "--out", tmp_path / "d.csv")
    assert PersistenceDiagram.from_csv(tmp_path / "d.csv") == sparse_diagram(from_points(pts), 0.2, "auto", 1)


def test_exact_cap(capsys):
    code, _, err = run(capsys, "persist", "--generate", 30, "--exact", "--exact-cap", 25)
    assert code == 2 and "limited" in err


def test_compare_exit_codes(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    PersistenceDiagram(((0, 0.0, 1.0), (0, 0.0, math.inf))).to_csv(a)
    PersistenceDiagram(((0, 0.0, 2.0), (0, 0.0, math.inf))).to_csv(b)
    assert run(capsys, "compare", a, a, "--additive", 0)[0] == 0
    assert run(capsys, "compare", a, a, "--bottleneck")[0] == 0
    assert run(capsys, "compare", a, b, "--additive", 0)[0] == 1
    assert run(capsys, "compare", a, b)[0] == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    assert run(capsys, "compare", a, bad)[0] == 2


def test_line_instance_compare(capsys, tmp_path, line_file):
    run(capsys, "persist", "--input", line_file, "--exact", "--out", tmp_path / "full.csv")
    sub = tmp_path / "sub.csv"
    sub.write_text("0\n10\n")
    run(capsys, "persist", "--input", sub, "--exact", "--out", tmp_path / "sub_pd.csv")
    code, _, _ = run(capsys, "compare", tmp_path / "sub_pd.csv", tmp_path / "full.csv", "--additive", 4)
    assert code == 0


def test_usage_errors(capsys, line_file):
    assert run(capsys, "greedy", "--input", line_file, "--k", 9)[0] == 2
    assert run(capsys, "greedy")[0] == 2
    assert run(capsys, "sparsify", "--input", line_file, "--epsilon", 0.4)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["greedy", "--format", "json"])
    assert exc.value.code == 2


def test_bench_single_size(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", 64)
    assert code == 0
    assert out.splitlines()[0] == "n,rep,k,u,u_per_k,greedy_ms,sparsify_ms,persist_ms,total_ms"
    assert "# loglog_slope,n/a" in out


@pytest.mark.parametrize("points", [(), ((0, 0.0, 1.0),), ((0, 0.0, 1.0), (0, 0.0, math.inf), (1, 0.3, 0.9))])
def test_plot(tmp_path, capsys, points):
    d = tmp_path / "d.csv"
    PersistenceDiagram(points).to_csv(d)
    for name in ("a.svg", "b.svg"):
        assert run(capsys, "plot", "--input", d, "--out", tmp_path / name)[0] == 0
    svg = (tmp_path / "a.svg").read_bytes()
    assert svg.startswith(b"<?xml") and svg == (tmp_path / "b.svg").read_bytes()


def test_module_entry_point(line_file):
    res = subprocess.run([sys.executable, "-m", "sparserips", "greedy", "--input", str(line_file), "--k", "2"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[2] == "3,10,125"
