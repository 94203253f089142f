"""Weights, relaxed distances, projections and critical values of the sparse filtration.

All point arguments are ranks in the greedy permutation (see
:mod:`sparserips.greedy`).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from math import isinf
from typing import NamedTuple

import numpy as np

from .greedy import DeletionSchedule, GreedyPermutation, check_epsilon, farthest_first, level, schedule
from .metric import FiniteMetricSpace


def weight(alpha, time, epsilon: float):
    """Piecewise-linear weight of a point with deletion ``time`` at scale ``alpha``.

    Zero up to ``(1 - 2 eps) time``, then rising with slope 1/2 until it
    meets ``eps * alpha`` at ``alpha = time``, and ``eps * alpha`` after that.
    Points with infinite deletion time always weigh 0.  Works elementwise on
    arrays.
    """
    alpha = np.asarray(alpha, dtype=float)
    time = np.asarray(time, dtype=float)
    start = (1 - 2 * epsilon) * time
    with np.errstate(invalid="ignore"):
        w = np.where(alpha <= start, 0.0,
                     np.where(alpha <= time, (alpha - start) / 2, epsilon * alpha))
    return float(w) if w.ndim == 0 else w


def _breakpoints(times, epsilon):
    pts = [0.0]
    for t in times:
        if not isinf(t):
            pts += [(1 - 2 * epsilon) * t, t]
    return sorted(set(pts))


def edge_root(d: float, time_i: float, time_j: float, epsilon: float) -> float:
    """Smallest ``alpha >= 0`` with ``d + w_alpha(i) + w_alpha(j) <= alpha``.

    ``f(alpha) = d + w_alpha(i) + w_alpha(j) - alpha`` is piecewise linear with
    non-positive slopes, so its zero set is a closed ray; the breakpoints of
    both weights are scanned and the root is solved on the first piece where
    ``f`` changes sign.  On a flat piece where ``f`` is already 0 the left end
    is returned.
    """
    def f(a):
        return d + weight(a, time_i, epsilon) + weight(a, time_j, epsilon) - a

    bps = _breakpoints((time_i, time_j), epsilon)
    prev, f_prev = bps[0], f(bps[0])
    if f_prev <= 0:
        return prev
    for b in bps[1:]:
        f_b = f(b)
        if f_b <= 0:
            return prev + f_prev * (b - prev) / (f_prev - f_b)
        prev, f_prev = b, f_b
    # past every breakpoint: each finite-time weight is eps * alpha
    slope = 1.0 - epsilon * sum(not isinf(t) for t in (time_i, time_j))
    return prev + f_prev / slope


def edge_roots(dist: np.ndarray, time: np.ndarray, epsilon: float) -> np.ndarray:
    """Vectorised :func:`edge_root` for every pair of ranks (diagonal is left at 0)."""
    k = len(time)
    iu, ju = np.triu_indices(k, k=1)
    d = dist[iu, ju]
    ti, tj = time[iu], time[ju]
    with np.errstate(invalid="ignore"):
        cand = np.stack([np.zeros_like(d), (1 - 2 * epsilon) * ti, ti, (1 - 2 * epsilon) * tj, tj], axis=1)
    cand = np.where(np.isfinite(cand), cand, np.nan)
    cand.sort(axis=1)  # nan last
    f = d[:, None] + weight(cand, ti[:, None], epsilon) + weight(cand, tj[:, None], epsilon) - cand
    f = np.where(np.isnan(cand), np.nan, f)
    nonpos = f <= 0
    first = np.where(nonpos.any(axis=1), nonpos.argmax(axis=1), -1)
    rows = np.arange(len(d))
    root = np.empty(len(d))
    at0 = first == 0
    root[at0] = 0.0
    mid = first > 0
    a, b = cand[rows[mid], first[mid] - 1], cand[rows[mid], first[mid]]
    fa, fb = f[rows[mid], first[mid] - 1], f[rows[mid], first[mid]]
    root[mid] = a + fa * (b - a) / (fa - fb)
    tail = first < 0
    last = np.sum(np.isfinite(cand[tail]), axis=1) - 1
    a, fa = cand[rows[tail], last], f[rows[tail], last]
    slope = 1.0 - epsilon * (np.isfinite(ti[tail]).astype(float) + np.isfinite(tj[tail]))
    root[tail] = a + fa / slope
    out = np.zeros((k, k))
    out[iu, ju] = root
    out[ju, iu] = root
    return out


class CriticalEvent(NamedTuple):
    """An edge entering (``EDGE``, ranks ``i > j``) or a vertex leaving (``DEL``, rank ``i``)."""

    alpha: float
    kind: str
    i: int
    j: int | None = None

    def sort_key(self):
        return (self.alpha, 0 if self.kind == "EDGE" else 1, self.i, -1 if self.j is None else self.j)


@dataclass(frozen=True)
class LevelHierarchy:
    """The selected prefix ``M_k`` of a traversal together with its deletion schedule.

    Bundles what the weights, relaxed distances and projections need: the
    distances among selected points (indexed by rank) and their deletion
    times.
    """

    space: FiniteMetricSpace
    perm: GreedyPermutation
    sched: DeletionSchedule
    dist: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, space: FiniteMetricSpace, perm: GreedyPermutation, epsilon: float) -> "LevelHierarchy":
        return cls(space, perm, schedule(perm, epsilon), space.submatrix(perm.order))

    @classmethod
    def from_space(cls, space: FiniteMetricSpace, k: int, epsilon: float, start: int = 0) -> "LevelHierarchy":
        check_epsilon(epsilon)
        return cls.build(space, farthest_first(space, k, start), epsilon)

    @property
    def k(self) -> int:
        return self.perm.k

    @property
    def epsilon(self) -> float:
        return self.sched.epsilon

    @property
    def time(self) -> np.ndarray:
        return self.sched.time

    def point(self, rank: int) -> int:
        return int(self.perm.order[rank])

    def weight(self, alpha: float, i: int) -> float:
        return weight(alpha, self.time[i], self.epsilon)

    def weights(self, alpha: float) -> np.ndarray:
        return weight(np.full(self.k, float(alpha)), self.time, self.epsilon)

    def relaxed_distance(self, alpha: float, i: int, j: int) -> float:
        """``D(i, j) + w_alpha(i) + w_alpha(j)``."""
        return float(self.dist[i, j]) + self.weight(alpha, i) + self.weight(alpha, j)

    def relaxed_matrix(self, alpha: float) -> np.ndarray:
        w = self.weights(alpha)
        return self.dist + w[:, None] + w[None, :]

    def level(self, alpha: float) -> np.ndarray:
        return level(self.sched, alpha)

    def project(self, alpha: float, p: int, lvl=None) -> int:
        """``p`` itself if it is in the level, else the level point nearest in relaxed distance.

        Ties go to the smallest rank.
        """
        lvl = self.level(alpha) if lvl is None else np.asarray(lvl, dtype=int)
        if len(lvl) == 0:
            raise ValueError("cannot project onto an empty level")
        if p in set(lvl.tolist()):
            return int(p)
        w = self.weights(alpha)
        cost = self.dist[p, lvl] + w[p] + w[lvl]
        return int(lvl[int(np.argmin(cost))])

    def edge_root(self, i: int, j: int) -> float:
        """First scale at which the relaxed edge ``(i, j)`` qualifies, ignoring deletions."""
        return edge_root(float(self.dist[i, j]), float(self.time[i]), float(self.time[j]), self.epsilon)

    def edge_critical_value(self, i: int, j: int) -> float | None:
        """:meth:`edge_root`, or ``None`` when the edge would appear only after an endpoint is gone."""
        a = self.edge_root(i, j)
        return a if a < min(self.time[i], self.time[j]) else None

    @cached_property
    def root_matrix(self) -> np.ndarray:
        return edge_roots(self.dist, self.time, self.epsilon)

    def neighbor_set(self, i: int) -> set[int]:
        """Lower ranks ``j`` with ``D_a(i, j) < a`` at ``a = time(i)``."""
        if i < 1:
            raise ValueError("neighbour sets are defined for ranks >= 1")
        a = float(self.time[i])
        return {j for j in range(i) if self.relaxed_distance(a, i, j) < a}


def critical_events(hier: LevelHierarchy) -> list[CriticalEvent]:
    """Vertex deletions for ranks >= 1 and every admissible edge insertion, sorted.

    Ties in ``alpha`` put insertions before deletions, then order by ranks.
    """
    k = hier.k
    time = hier.time
    events = [CriticalEvent(float(time[i]), "DEL", i) for i in range(1, k)]
    if k > 1:
        roots = hier.root_matrix
        ii, jj = np.tril_indices(k, k=-1)
        r = roots[ii, jj]
        keep = r < np.minimum(time[ii], time[jj])
        events += [CriticalEvent(float(a), "EDGE", int(i), int(j))
                   for a, i, j in zip(r[keep], ii[keep], jj[keep])]
    events.sort(key=CriticalEvent.sort_key)
    return events


def neighbor_set(i: int, events, time) -> set[int]:
    """Ranks ``j < i`` whose edge to ``i`` is present just before ``i`` is deleted.

    Read off an event list: an edge counts if it entered strictly before
    ``time(i)``.  Matches :meth:`LevelHierarchy.neighbor_set` up to edges
    whose relaxed distance equals the scale exactly.
    """
    t = time[i]
    return {e.j for e in events if e.kind == "EDGE" and e.i == i and e.alpha < t}


def max_neighbor_set_size(hier: LevelHierarchy) -> int:
    """``max_i |E(p_i)|`` evaluated in one vectorised pass."""
    if hier.k < 2:
        return 0
    best = 0
    for i in range(1, hier.k):
        a = float(hier.time[i])
        w = weight(np.full(i + 1, a), hier.time[:i + 1], hier.epsilon)
        best = max(best, int(np.sum(hier.dist[i, :i] + w[i] + w[:i] < a)))
    return best


def write_events(path_or_file, events) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        fh.write("alpha,kind,i,j\n")
        for e in events:
            row = [f"{e.alpha:.17g}", e.kind, str(e.i)]
            if e.j is not None:
                row.append(str(e.j))
            fh.write(",".join(row) + "\n")
    finally:
        if own:
            fh.close()


def read_events(path) -> list[CriticalEvent]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None or header[:3] != ["alpha", "kind", "i"]:
            raise ValueError("event file must start with the header alpha,kind,i,j")
        for row in rows:
            if row[1] == "EDGE":
                out.append(CriticalEvent(float(row[0]), "EDGE", int(row[2]), int(row[3])))
            elif row[1] == "DEL":
                out.append(CriticalEvent(float(row[0]), "DEL", int(row[2])))
            else:
                raise ValueError(f"unknown event kind {row[1]!r}")
    return out

