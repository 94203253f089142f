"""Command line interface: ``sparserips {greedy,sparsify,persist,compare,bench,plot}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .complex import EXACT_CAP, sparse_zigzag_events, vr_filtration_events
from .diagram import compare
from .greedy import GreedyPermutation, check_epsilon, farthest_first, resolve_k, schedule
from .metric import METRIC_KINDS, FiniteMetricSpace, MetricError, from_points, read_matrix, read_points
from .persistence import PersistenceDiagram, reduce_standard, warmup, zigzag_persistence
from .sparse import LevelHierarchy, critical_events, max_neighbor_set_size, write_events

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SIZES = (256, 512, 1024, 2048)


class UsageError(Exception):
    pass


def uniform_points(n: int, seed: int, dim: int = 2) -> np.ndarray:
    """Seeded uniform sample of the unit square (or cube)."""
    return np.random.default_rng(seed).random((n, dim))


def _load_space(args) -> FiniteMetricSpace:
    if args.generate is not None:
        if args.input is not None:
            raise UsageError("give either --input or --generate, not both")
        if args.generate < 1:
            raise UsageError("--generate needs a positive point count")
        return from_points(uniform_points(args.generate, args.seed), args.metric)
    if args.input is None:
        raise UsageError("--input (or --generate) is required")
    if args.format == "matrix":
        return read_matrix(args.input)
    return read_points(args.input, args.metric)


def _hierarchy(args, space) -> LevelHierarchy:
    eps = check_epsilon(args.epsilon)
    return LevelHierarchy.from_space(space, resolve_k(args.k, space.n), eps, args.start)


def _write_text(out, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.17g}"


def _read_traversal(path, space: FiniteMetricSpace) -> GreedyPermutation:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "index,rad,time":
        raise UsageError(f"{path}: traversal file must start with the header index,rad,time")
    order, rad = [], []
    for line in lines[1:]:
        if line.strip():
            idx, r, _ = line.split(",")
            order.append(int(idx))
            rad.append(float(r))
    if not order or any(not 0 <= p < space.n for p in order):
        raise UsageError(f"{path}: traversal does not fit the input ({space.n} points)")
    residual = np.full(space.n, np.inf)
    for p in order:
        np.minimum(residual, space.row(p), out=residual)
    return GreedyPermutation(np.array(order), np.array(rad), residual)


def cmd_greedy(args) -> int:
    space = _load_space(args)
    k = resolve_k(args.k, space.n)
    initial = _read_traversal(args.extend, space) if args.extend else None
    if initial is not None and initial.order[0] != args.start:
        args.start = int(initial.order[0])
    perm = farthest_first(space, k, args.start, initial=initial)
    sched = schedule(perm, args.epsilon)
    rows = ["index,rad,time"]
    rows += [f"{p},{_fmt(r)},{_fmt(t)}" for p, r, t in zip(perm.order, perm.rad, sched.time)]
    _write_text(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


def _summary(hier: LevelHierarchy, u: int) -> dict:
    eps = hier.epsilon
    cover = hier.perm.covering_radius
    return {
        "n": hier.space.n,
        "k": hier.k,
        "epsilon": eps,
        "max_dim": None,
        "u": u,
        "u_per_k": u / hier.k,
        "max_neighbor_set": max_neighbor_set_size(hier),
        "covering_radius": cover,
        "additive_radius": 2 * cover,
        "multiplicative_factor": 1 / (1 - 2 * eps),
        "predicted_error_radius": 2 * cover / (1 - 2 * eps),
    }


def cmd_sparsify(args) -> int:
    space = _load_space(args)
    hier = _hierarchy(args, space)
    events = critical_events(hier)
    stream = sparse_zigzag_events(hier, args.max_dim)
    summary = _summary(hier, stream.u)
    summary["max_dim"] = args.max_dim
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        stream.to_csv(sys.stdout)
        sys.stderr.write(text)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_events(out / "critical_events.csv", events)
        stream.to_csv(out / "stream.csv")
        (out / "summary.json").write_text(text, encoding="utf-8")
    return EXIT_OK


def sparse_diagram(space: FiniteMetricSpace, epsilon: float, k, max_dim: int, start: int = 0) -> PersistenceDiagram:
    """The sparse pipeline: traversal, stream, zigzag persistence."""
    hier = LevelHierarchy.from_space(space, resolve_k(k, space.n), check_epsilon(epsilon), start)
    return zigzag_persistence(sparse_zigzag_events(hier, max_dim), max_dim, check=False)


def exact_diagram(space: FiniteMetricSpace, max_dim: int, cap: int = EXACT_CAP) -> PersistenceDiagram:
    return reduce_standard(vr_filtration_events(space, max_dim + 1, cap=cap), max_dim)


def cmd_persist(args) -> int:
    space = _load_space(args)
    if args.exact:
        if space.n > args.exact_cap:
            raise UsageError(f"--exact is limited to {args.exact_cap} points (got {space.n}); raise --exact-cap")
        pd = exact_diagram(space, args.max_dim, cap=args.exact_cap)
    else:
        pd = sparse_diagram(space, args.epsilon, args.k, args.max_dim, args.start)
    if args.out is None:
        pd.to_csv(sys.stdout)
    else:
        pd.to_csv(args.out)
    if args.verbose:
        sys.stderr.write(f"zero-length intervals discarded: {pd.n_zero_length}\n")
    if args.plot:
        plot_diagram(pd, args.plot)
    return EXIT_OK


def _read_diagram(path) -> PersistenceDiagram:
    try:
        return PersistenceDiagram.from_csv(path)
    except (OSError, ValueError, IndexError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_compare(args) -> int:
    a, b = _read_diagram(args.a), _read_diagram(args.b)
    if args.multiplicative is not None:
        check_epsilon(args.multiplicative)
    if args.additive is not None and args.additive < 0:
        raise UsageError("--additive needs r >= 0")
    rep = compare(a, b, additive=args.additive, multiplicative=args.multiplicative,
                  with_bottleneck=args.bottleneck)
    _write_text(args.out, rep.text())
    return EXIT_OK if rep.passed else EXIT_FAIL


def loglog_slope(sizes, totals) -> float | None:
    """Least-squares slope of log(total) against log(n); ``None`` for fewer than two sizes."""
    if len(set(sizes)) < 2:
        return None
    return float(np.polyfit(np.log(sizes), np.log(totals), 1)[0])


def run_bench(sizes, epsilon: float, max_dim: int, seed: int, repetitions: int = 1, log=None):
    """Time the sparse pipeline on seeded uniform planar samples.

    Returns a list of row dicts, one per (n, repetition).
    """
    warmup()  # keep JIT compilation out of the timings
    rows = []
    for n in sizes:
        for rep in range(repetitions):
            pts = uniform_points(n, seed + 1000003 * rep + n)
            t0 = time.perf_counter()
            space = from_points(pts)
            k = resolve_k("auto", n)
            perm = farthest_first(space, k)
            t1 = time.perf_counter()
            hier = LevelHierarchy.build(space, perm, epsilon)
            stream = sparse_zigzag_events(hier, max_dim)
            t2 = time.perf_counter()
            pd = zigzag_persistence(stream, max_dim, check=False)
            t3 = time.perf_counter()
            row = {"n": n, "rep": rep, "k": k, "u": stream.u, "u_per_k": stream.u / k,
                   "greedy_ms": 1e3 * (t1 - t0), "sparsify_ms": 1e3 * (t2 - t1),
                   "persist_ms": 1e3 * (t3 - t2), "total_ms": 1e3 * (t3 - t0), "points": len(pd)}
            rows.append(row)
            if log is not None:
                log(row)
    return rows


def bench_report(rows) -> tuple[str, float | None, float | None]:
    cols = ["n", "rep", "k", "u", "u_per_k", "greedy_ms", "sparsify_ms", "persist_ms", "total_ms"]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(f"{r[c]:.3f}" if isinstance(r[c], float) else str(r[c]) for c in cols))
    sizes = sorted({r["n"] for r in rows})
    mean_total = [np.mean([r["total_ms"] for r in rows if r["n"] == n]) for n in sizes]
    mean_ratio = [np.mean([r["u_per_k"] for r in rows if r["n"] == n]) for n in sizes]
    slope = loglog_slope(sizes, mean_total)
    spread = float(max(mean_ratio) / min(mean_ratio)) if len(sizes) > 1 else None
    lines.append(f"# loglog_slope,{'n/a' if slope is None else f'{slope:.4f}'}")
    lines.append(f"# u_per_k_spread,{'n/a' if spread is None else f'{spread:.4f}'}")
    return "\n".join(lines) + "\n", slope, spread


def cmd_bench(args) -> int:
    sizes = args.sizes
    if sizes != sorted(sizes) or any(n < 1 for n in sizes):
        raise UsageError("--sizes must be positive and ascending")
    eps = check_epsilon(args.epsilon)
    log = (lambda r: sys.stderr.write(f"n={r['n']} u={r['u']} total={r['total_ms']:.0f} ms\n")) if args.verbose else None
    rows = run_bench(sizes, eps, args.max_dim, args.seed, args.repetitions, log)
    text, slope, _ = bench_report(rows)
    _write_text(args.out, text)
    return EXIT_FAIL if slope is not None and slope >= 2.0 else EXIT_OK


def plot_diagram(pd: PersistenceDiagram, path) -> None:
    """Write an SVG scatter of the diagram; essential classes sit on a band at the top."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "sparserips"
    finite = [p for p in pd.points if not math.isinf(p[2])]
    values = [p[1] for p in pd.points] + [p[2] for p in finite]
    hi = max(values, default=1.0) or 1.0
    top = 1.1 * hi
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, top], [0, top], color="0.5", lw=1)
    ax.axhline(top, color="0.7", ls="--", lw=1)
    ax.text(0, top, " inf", va="bottom", fontsize=8)
    for dim in pd.dims:
        pts = pd.in_dim(dim)
        ys = np.where(np.isinf(pts[:, 1]), top, pts[:, 1])
        ax.scatter(pts[:, 0], ys, s=14, label=f"H{dim}")
    ax.set_xlim(-0.05 * top, 1.05 * top)
    ax.set_ylim(-0.05 * top, 1.1 * top)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    if pd.dims:
        ax.legend(loc="lower right")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_plot(args) -> int:
    if args.input is None:
        raise UsageError("--input diagram file is required")
    pd = _read_diagram(args.input)
    plot_diagram(pd, args.out if args.out is not None else sys.stdout.buffer)
    return EXIT_OK


def _k_arg(value: str):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a positive integer or 'auto', got {value!r}") from None


def _data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="point or distance-matrix file")
    p.add_argument("--format", choices=["points", "matrix"], default="points")
    p.add_argument("--metric", choices=sorted(METRIC_KINDS), default="euclidean",
                   help="norm for point files")
    p.add_argument("--generate", type=int, metavar="N",
                   help="use N seeded uniform points in the unit square instead of --input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--k", type=_k_arg, default="auto")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--max-dim", type=int, default=1, help="top homology dimension")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparserips", description="Sparse zigzag approximation of Rips persistence.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("greedy", help="farthest-first traversal as index,rad,time")
    _data_options(p)
    p.add_argument("--extend", metavar="CSV", help="continue a saved traversal")
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("sparsify", help="critical events and zigzag stream; --out is a directory")
    _data_options(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("persist", help="persistence diagram (sparse, or exact with --exact)")
    _data_options(p)
    p.add_argument("--exact", action="store_true", help="brute-force Rips filtration instead")
    p.add_argument("--exact-cap", type=int, default=64, help="largest input accepted by --exact")
    p.add_argument("--plot", metavar="SVG", help="also write a plot of the diagram")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("compare", help="compare two diagram files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--additive", type=float, metavar="R")
    p.add_argument("--multiplicative", type=float, metavar="EPS")
    p.add_argument("--bottleneck", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="time the sparse pipeline on growing inputs")
    p.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES))
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-dim", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="SVG plot of a diagram file")
    p.add_argument("--input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_dim", 0) < 0:
        parser.error("--max-dim must be >= 0")
    try:
        return args.func(args)
    except (UsageError, MetricError, ValueError, OSError) as exc:
        sys.stderr.write(f"sparserips {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
