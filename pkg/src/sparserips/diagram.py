"""Diagram comparisons: L1 offsets, bottleneck distance and interleaving band checks."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .metric import COMPARE_TOL
from .persistence import PersistenceDiagram


def _split(pd: PersistenceDiagram, dim: int):
    pts = pd.in_dim(dim)
    inf_mask = np.isinf(pts[:, 1])
    return pts[~inf_mask], np.sort(pts[inf_mask, 0])


def _all_dims(*pds) -> list[int]:
    return sorted(set().union(*(pd.dims for pd in pds)))


def _l1_needed(A: PersistenceDiagram, B: PersistenceDiagram, dim: int) -> float:
    """Smallest r such that every point of A (in ``dim``) lies in the r-offset of B."""
    fa, ia = _split(A, dim)
    fb, ib = _split(B, dim)
    need = 0.0
    for b in ia:
        if len(ib) == 0:
            return math.inf
        need = max(need, float(np.min(np.abs(ib - b))))
    for b, d in fa:
        best = d - b  # L1 distance to the diagonal
        if len(fb):
            best = min(best, float(np.min(np.abs(fb[:, 0] - b) + np.abs(fb[:, 1] - d))))
        need = max(need, best)
    return need


def offset_radius(A: PersistenceDiagram, B: PersistenceDiagram) -> float:
    """Smallest r with A inside the L1 r-offset of B ∪ diagonal, over every dimension."""
    return max((_l1_needed(A, B, k) for k in _all_dims(A)), default=0.0)


def l1_offset_contained(A: PersistenceDiagram, B: PersistenceDiagram, r: float,
                        tol: float = COMPARE_TOL) -> bool:
    """Whether every point of A is within L1 distance ``r`` of a point of B or of the diagonal.

    Points with infinite death only match points of B with infinite death,
    at cost ``|birth difference|``.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    return offset_radius(A, B) <= r + tol


def _perfect_matching(n_a: int, n_b: int, allowed: Callable[[int, int], bool],
                      a_to_diag: Callable[[int], bool], b_to_diag: Callable[[int], bool]):
    """Match every A and B point to a partner or to the diagonal.

    Rows are A points followed by one diagonal slot per B point; columns are
    B points followed by one diagonal slot per A point.  Returns the list of
    matched ``(i, j)`` point pairs (``j = None`` for the diagonal) or ``None``
    when no complete matching exists.
    """
    size = n_a + n_b
    if size == 0:
        return []
    rows, cols = [], []
    for i in range(n_a):
        for j in range(n_b):
            if allowed(i, j):
                rows.append(i)
                cols.append(j)
        if a_to_diag(i):
            rows.append(i)
            cols.append(n_b + i)
    for j in range(n_b):
        if b_to_diag(j):
            rows.append(n_a + j)
            cols.append(j)
    # diagonal slots absorb each other freely
    for j in range(n_b):
        for i in range(n_a):
            rows.append(n_a + j)
            cols.append(n_b + i)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    if np.any(match < 0):
        return None
    return [(i, int(match[i]) if match[i] < n_b else None) for i in range(n_a)]


def _bottleneck_dim(A: PersistenceDiagram, B: PersistenceDiagram, dim: int) -> float:
    fa, ia = _split(A, dim)
    fb, ib = _split(B, dim)
    if len(ia) != len(ib):
        return math.inf
    cost = float(np.max(np.abs(ia - ib))) if len(ia) else 0.0
    if len(fa) + len(fb) == 0:
        return cost
    pair = np.maximum(np.abs(fa[:, None, 0] - fb[None, :, 0]), np.abs(fa[:, None, 1] - fb[None, :, 1]))
    da = (fa[:, 1] - fa[:, 0]) / 2
    db = (fb[:, 1] - fb[:, 0]) / 2
    candidates = np.unique(np.concatenate([pair.ravel(), da, db]))
    lo, hi = 0, len(candidates) - 1  # the largest candidate always admits a matching
    while lo < hi:
        mid = (lo + hi) // 2
        c = candidates[mid]
        ok = _perfect_matching(len(fa), len(fb), lambda i, j: pair[i, j] <= c,
                               lambda i: da[i] <= c, lambda j: db[j] <= c)
        if ok is None:
            lo = mid + 1
        else:
            hi = mid
    return max(cost, float(candidates[lo]))


def bottleneck(A: PersistenceDiagram, B: PersistenceDiagram) -> float:
    """Bottleneck distance (L∞ ground metric), the maximum over dimensions."""
    return max((_bottleneck_dim(A, B, k) for k in _all_dims(A, B)), default=0.0)


def additive_band_check(A: PersistenceDiagram, E: PersistenceDiagram, r: float) -> bool:
    """Two-sided L1 offset containment at radius ``r``."""
    return l1_offset_contained(A, E, r) and l1_offset_contained(E, A, r)


def _in_band(x: float, lo: float, hi: float, tol: float) -> bool:
    if math.isinf(x) or math.isinf(hi):
        return math.isinf(x) and math.isinf(hi)
    return lo - tol <= x <= hi + tol


def multiplicative_band_matching(S: PersistenceDiagram, V: PersistenceDiagram, epsilon: float,
                                 tol: float = COMPARE_TOL):
    """Witness matching for :func:`multiplicative_band_check`.

    Returns ``{dim: [(s_point, v_point or None), ...]}`` covering every
    S-point, or ``None`` if some dimension has no valid matching.
    """
    c = 1 - 2 * epsilon
    witness = {}
    for dim in _all_dims(S, V):
        s, v = S.in_dim(dim), V.in_dim(dim)

        def allowed(i, j):
            (b, d), (bv, dv) = s[i], v[j]
            return _in_band(bv, c * b, b, tol) and _in_band(dv, c * d, d, tol)

        match = _perfect_matching(
            len(s), len(v), allowed,
            lambda i: not math.isinf(s[i, 1]) and c * s[i, 1] <= s[i, 0] + tol,
            lambda j: not math.isinf(v[j, 1]) and c * v[j, 1] <= v[j, 0] + tol)
        if match is None:
            return None
        witness[dim] = [(tuple(s[i]), None if j is None else tuple(v[j])) for i, j in match]
    return witness


def multiplicative_band_check(S: PersistenceDiagram, V: PersistenceDiagram, epsilon: float,
                              tol: float = COMPARE_TOL) -> bool:
    """Whether S and V are matched within the one-sided multiplicative band.

    A matched S-point ``(b, d)`` and V-point ``(b', d')`` need
    ``b' ∈ [(1-2eps) b, b]`` and ``d' ∈ [(1-2eps) d, d]``.  Unmatched points
    must be short: ``(1-2eps) d <= b`` for S and ``d' <= b' / (1-2eps)`` for V,
    which is the same inequality.  Essential classes match essential classes.
    """
    if not 0 < epsilon < 1 / 3:
        raise ValueError(f"epsilon must lie in (0, 1/3), got {epsilon}")
    return multiplicative_band_matching(S, V, epsilon, tol) is not None


@dataclass
class ComparisonReport:
    """Outcome of comparing two diagrams.

    ``checks`` holds ``(check, param, value, passed)`` rows; ``value`` is the
    measured quantity (radius needed, distance) or empty.
    """

    offset_ab: float
    offset_ba: float
    bottleneck: float | None = None
    checks: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(row[3] for row in self.checks)

    def text(self) -> str:
        out = io.StringIO()
        out.write("diagram comparison\n")
        for key, val in self.params.items():
            out.write(f"  {key}: {val}\n")
        out.write(f"  L1 offset radius needed A->B: {self.offset_ab:.17g}\n")
        out.write(f"  L1 offset radius needed B->A: {self.offset_ba:.17g}\n")
        if self.bottleneck is not None:
            out.write(f"  bottleneck distance: {self.bottleneck:.17g}\n")
        out.write(f"  result: {'PASS' if self.passed else 'FAIL'}\n\n")
        out.write("check,param,value,pass\n")
        for check, param, value, ok in self.checks:
            out.write(f"{check},{_fmt(param)},{_fmt(value)},{str(bool(ok)).lower()}\n")
        return out.getvalue()


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.17g}"
    return str(x)


def compare(A: PersistenceDiagram, B: PersistenceDiagram, additive: float | None = None,
            multiplicative: float | None = None, with_bottleneck: bool = False) -> ComparisonReport:
    """Run the requested checks and collect them in a report.

    With no check requested the two diagrams must agree exactly (bottleneck
    zero up to the comparison tolerance).
    """
    rep = ComparisonReport(offset_radius(A, B), offset_radius(B, A))
    if additive is not None:
        rep.params["r"] = additive
        rep.checks.append(("additive", additive, max(rep.offset_ab, rep.offset_ba),
                           additive_band_check(A, B, additive)))
    if multiplicative is not None:
        rep.params["epsilon"] = multiplicative
        rep.checks.append(("multiplicative", multiplicative, "",
                           multiplicative_band_check(A, B, multiplicative)))
    if with_bottleneck or not rep.checks:
        rep.bottleneck = bottleneck(A, B)
        if with_bottleneck:
            rep.checks.append(("bottleneck", "", rep.bottleneck, True))
        else:
            rep.checks.append(("equal", "", rep.bottleneck, rep.bottleneck <= COMPARE_TOL))
    return rep
