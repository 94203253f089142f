"""Acceptance suite: one gated check per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the per-criterion
lines are printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from sparserips.cli import bench_report, exact_diagram, run_bench, sparse_diagram
from sparserips.complex import build_rvr, build_svr, build_vr, rvr_filtration_events, sparse_zigzag_events
from sparserips.diagram import additive_band_check, multiplicative_band_check
from sparserips.greedy import farthest_first, optimal_kcenter
from sparserips.metric import from_points
from sparserips.persistence import homology_rank, reduce_standard, zigzag_persistence
from sparserips.sparse import LevelHierarchy, weight

EPSILONS = (0.05, 0.1, 0.2, 0.3)
TOL = 1e-9
RESULTS: dict = {}


def report(key, ok, detail):
    RESULTS[key] = (bool(ok), detail)
    assert ok, f"criterion {key}: {detail}"


def suite(seed, count, n_lo, n_hi):
    """Seeded planar instances: (rng, points, epsilon) with n in [n_lo, n_hi]."""
    rng = np.random.default_rng(seed)
    out = []
    for m in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        out.append((np.random.default_rng([seed, m]), rng.random((n, 2)), EPSILONS[m % len(EPSILONS)]))
    return out


SUITES = {
    "sandwich": (101, 100, 3, 15),
    "isomorphism": (102, 50, 3, 18),
    "bands": (103, 50, 4, 14),
    "snapshot": (105, 50, 3, 15),
    "ranks": (106, 200, 3, 10),
    "kcenter": (107, 30, 2, 12),
    "properties": (108, 100, 2, 15),
}


def test_c1_sandwich_inclusions():
    start = time.perf_counter()
    checked = violations = 0
    for rng, pts, eps in suite(*SUITES["sandwich"]):
        sp = from_points(pts)
        hier = LevelHierarchy.from_space(sp, sp.n, eps)
        for a in rng.random(20) * 1.6:
            inner = build_vr(sp, (1 - 2 * eps) * a, 2).simplex_set
            mid = build_rvr(hier, a, 2).simplex_set
            outer = build_vr(sp, a, 2).simplex_set
            checked += 1
            violations += not (inner <= mid <= outer)
    elapsed = time.perf_counter() - start
    report("1 sandwich inclusions", violations == 0 and elapsed < 30,
           f"{checked} (instance, alpha) pairs, {violations} violations, {elapsed:.1f} s (limit 30 s)")


def test_c2_sparse_equals_relaxed():
    mismatches = 0
    for rng, pts, eps in suite(*SUITES["isomorphism"]):
        sp = from_points(pts)
        k = int(rng.integers(1, min(12, sp.n) + 1))
        hier = LevelHierarchy.from_space(sp, k, eps)
        zz = zigzag_persistence(sparse_zigzag_events(hier, 1), 1)
        ref = reduce_standard(rvr_filtration_events(hier, 2), 1)
        mismatches += not zz.isclose(ref, TOL)
    report("2 sparse zigzag = relaxed ascending", mismatches == 0,
           f"50 instances (k <= 12, max_dim 1), {mismatches} mismatches at tol {TOL}")


def _band_suite():
    for rng, pts, eps in suite(*SUITES["bands"]):
        sp = from_points(pts)
        full = exact_diagram(sp, 1)
        for k in range(2, sp.n + 1):
            yield sp, eps, k, full


def test_c3_additive_error():
    checked = failures = 0
    for sp, eps, k, full in _band_suite():
        perm = farthest_first(sp, k)
        sub = exact_diagram(sp.subspace(perm.order), 1)
        checked += 1
        failures += not additive_band_check(sub, full, 2 * perm.covering_radius)
    report("3 additive band 2 rad(p_k)", failures == 0, f"{checked} (instance, k) pairs, {failures} failures")


def test_c4_multiplicative_error():
    checked = failures = 0
    for sp, eps, k, _ in _band_suite():
        hier = LevelHierarchy.from_space(sp, k, eps)
        relaxed = reduce_standard(rvr_filtration_events(hier, 2), 1)
        vr_k = exact_diagram(sp.subspace(hier.perm.order), 1)
        checked += 1
        failures += not multiplicative_band_check(relaxed, vr_k, eps)
    report("4 multiplicative band 1/(1-2eps)", failures == 0, f"{checked} (instance, k) pairs, {failures} failures")


def test_c5_snapshot_equivalence():
    checked = mismatches = 0
    for rng, pts, eps in suite(*SUITES["snapshot"]):
        sp = from_points(pts)
        hier = LevelHierarchy.from_space(sp, sp.n, eps)
        stream = sparse_zigzag_events(hier, 1)
        top = 1.1 * max(hier.time[1:].max(initial=1.0), 1.0)
        event_alphas = [e.alpha for e in stream]
        alphas = list(rng.random(10) * top) + list(rng.choice(event_alphas, 10))
        for a in alphas:
            checked += 1
            mismatches += stream.snapshot(a) != build_svr(hier, a, 2)
    report("5 snapshot equivalence", mismatches == 0, f"{checked} (instance, alpha) pairs, {mismatches} mismatches")


def test_c6_zigzag_rank_oracle():
    streams = checked = mismatches = 0
    for rng, pts, eps in suite(*SUITES["ranks"]):
        sp = from_points(pts)
        stream = sparse_zigzag_events(LevelHierarchy.from_space(sp, sp.n, eps), 1)
        if stream.u > 200:
            continue
        streams += 1
        pd = zigzag_persistence(stream, 1)
        finite = sorted({e.alpha for e in stream})
        gaps = [b - a for a, b in zip(finite, finite[1:])] or [1.0]
        delta = min(min(gaps) / 2, 1e-6)
        for a in finite:
            for x in (a - delta, a, a + delta):
                cx = stream.snapshot(x)
                for dim in (0, 1):
                    checked += 1
                    mismatches += pd.count_alive(x, dim) != homology_rank(cx, dim)
    report("6 zigzag interval counts = snapshot ranks", mismatches == 0 and streams >= 30,
           f"{streams} streams with u <= 200, {checked} (alpha, dim) checks, {mismatches} mismatches")


def test_c7_gonzalez_two_approximation():
    checked = failures = 0
    for _, pts, _ in suite(*SUITES["kcenter"]):
        sp = from_points(pts)
        for k in range(1, sp.n + 1):
            checked += 1
            failures += farthest_first(sp, k).covering_radius > 2 * optimal_kcenter(sp, k)
    unsorted = 0
    for args in SUITES.values():
        for _, pts, _ in suite(*args):
            rad = farthest_first(from_points(pts), len(pts)).rad
            unsorted += bool(np.any(np.diff(rad[1:]) > 0))
    report("7 greedy 2-approximation", failures == 0 and unsorted == 0,
           f"{checked} (instance, k) pairs, {failures} over 2x optimum; {unsorted} instances with increasing radii")


def test_c8_projection_and_weight_properties():
    draws = 0
    bad = {"proj_i": 0, "proj_ii": 0, "proj_iii": 0, "monotone": 0, "slope": 0, "bounds": 0}
    for rng, pts, eps in suite(*SUITES["properties"]):
        sp = from_points(pts)
        hier = LevelHierarchy.from_space(sp, sp.n, eps)
        k = hier.k
        top = 1.2 * max(hier.time[1:].max(initial=1.0), 1.0)
        for _ in range(100):
            draws += 1
            a, b = np.sort(rng.random(2) * top)
            p, q = (int(x) for x in rng.integers(0, k, 2))
            w = hier.weights(a)
            lvl = hier.level(a)
            # (i) some level point q' with D(p, q') <= w(p) - w(q')
            bad["proj_i"] += int(not np.any(hier.dist[p, lvl] <= w[p] - w[lvl] + TOL))
            pi = hier.project(a, p, lvl)
            bad["proj_ii"] += int(hier.dist[p, pi] > w[p] - w[pi] + TOL)
            bad["proj_iii"] += hier.relaxed_distance(a, pi, q) > hier.relaxed_distance(a, p, q) + TOL
            if hier.relaxed_distance(a, p, q) <= a:
                bad["monotone"] += int(hier.relaxed_distance(b, p, q) > b + TOL)
            wa, wb = weight(a, hier.time[p], eps), weight(b, hier.time[p], eps)
            bad["slope"] += int(abs(wb - wa) > (b - a) / 2 + TOL)
            bad["bounds"] += not (-TOL <= wa <= eps * a + TOL)
    total = sum(bad.values())
    report("8 projection and weight properties", draws >= 10_000 and total == 0,
           f"{draws} draws, violations {bad}")


@pytest.fixture(scope="module")
def bench():
    start = time.perf_counter()
    rows = run_bench([256, 512, 1024, 2048], 0.1, 1, seed=0)
    _, slope, spread = bench_report(rows)
    return rows, slope, spread, time.perf_counter() - start


@pytest.mark.slow
def test_c9a_update_count_per_point(bench):
    rows, _, spread, elapsed = bench
    ratios = ", ".join(f"n={r['n']}: {r['u_per_k']:.0f}" for r in rows)
    report("9a u/k varies < 2x across n", spread < 2.0, f"u/k {ratios}; spread {spread:.2f}x (limit 2x)")


@pytest.mark.slow
def test_c9b_loglog_time_slope(bench):
    rows, slope, _, elapsed = bench
    report("9b log-log time slope < 2.0 within 5 min", slope < 2.0 and elapsed < 300,
           f"slope {slope:.3f}; bench wall time {elapsed:.0f} s")


def test_c10_circle():
    t = 2 * np.pi * np.arange(30) / 30
    sp = from_points(np.c_[np.cos(t), np.sin(t)])
    exact = exact_diagram(sp, 1, cap=30)
    h1 = exact.in_dim(1)
    pers = np.sort(h1[:, 1] - h1[:, 0])[::-1]
    dominant = len(pers) >= 1 and (len(pers) == 1 or pers[0] >= 5 * pers[1])
    # analytic reference: the cycle closes at the chord 2 sin(pi/30) and is
    # filled at the side sqrt(3) of the inscribed equilateral triangle
    ref = dominant and np.allclose(h1[np.argmax(h1[:, 1] - h1[:, 0])], [2 * math.sin(math.pi / 30), math.sqrt(3)])
    sparse = sparse_diagram(sp, 0.1, 30, 1)
    s1 = sparse.in_dim(1)
    one = len(s1) >= 1 and (len(s1) == 1 or np.sort(s1[:, 1] - s1[:, 0])[-1] >= 5 * np.sort(s1[:, 1] - s1[:, 0])[-2])
    band = multiplicative_band_check(sparse, exact, 0.1)
    report("10 circle sanity", dominant and ref and one and band,
           f"exact H1 {h1.tolist()}, sparse H1 {s1.tolist()}, band {'ok' if band else 'violated'}")
