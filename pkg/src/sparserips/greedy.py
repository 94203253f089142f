"""Farthest-first traversal (Gonzalez), deletion times and levels.

Points of the traversal are referred to by *rank*: rank ``r`` is the
``r``-th selected point, whose index in the metric space is ``order[r]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import ceil, comb, inf

import numpy as np

from .metric import FiniteMetricSpace

#: largest space accepted by the brute-force k-center oracle
KCENTER_CAP = 14


@dataclass(frozen=True)
class GreedyPermutation:
    """Prefix ``p_1..p_k`` of a greedy permutation.

    Attributes
    ----------
    order : (k,) int array
        Point indices in traversal order.
    rad : (k,) float array
        Insertion radii, ``rad[0] = inf``.
    distance_to_prefix : (n,) float array
        Distance of every point of the space to the selected prefix.
    """

    order: np.ndarray
    rad: np.ndarray
    distance_to_prefix: np.ndarray

    @property
    def k(self) -> int:
        return len(self.order)

    @property
    def covering_radius(self) -> float:
        """``max_p D(p, M_k)``: the k-center cost of the prefix (``rad(p_{k+1})``, or 0 when k = n)."""
        return float(self.distance_to_prefix.max())

    def rank_of(self) -> dict[int, int]:
        return {int(p): r for r, p in enumerate(self.order)}


@dataclass(frozen=True)
class DeletionSchedule:
    epsilon: float
    time: np.ndarray

    @property
    def k(self) -> int:
        return len(self.time)


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0 < epsilon < 1 / 3:
        raise ValueError(f"epsilon must lie in (0, 1/3), got {epsilon}")
    return epsilon


def farthest_first(space: FiniteMetricSpace, k: int, start: int = 0,
                   initial: GreedyPermutation | None = None) -> GreedyPermutation:
    """Select ``k`` points by farthest-first traversal in O(kn) distance evaluations.

    Each step picks the point with the largest residual distance to the
    chosen prefix (smallest index on ties) and lowers every residual by the
    distances to the new point.  Passing ``initial`` continues a previous
    traversal instead of starting over; the result is identical to a fresh
    run with the same start.
    """
    n = space.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if initial is None:
        if not 0 <= start < n:
            raise ValueError(f"start index {start} out of range for {n} points")
        order = [int(start)]
        rad = [inf]
        residual = np.array(space.row(start), dtype=float)
    else:
        if initial.k > k:
            raise ValueError("cannot extend a traversal to fewer points")
        order = [int(p) for p in initial.order]
        rad = [float(r) for r in initial.rad]
        residual = np.array(initial.distance_to_prefix, dtype=float)
    chosen = np.zeros(n, dtype=bool)
    chosen[order] = True
    while len(order) < k:
        nxt = int(np.argmax(np.where(chosen, -1.0, residual)))
        order.append(nxt)
        rad.append(float(residual[nxt]))
        chosen[nxt] = True
        np.minimum(residual, space.row(nxt), out=residual)
        residual[nxt] = 0.0
    return GreedyPermutation(np.array(order, dtype=int), np.array(rad), residual)


def schedule(perm: GreedyPermutation, epsilon: float) -> DeletionSchedule:
    """Deletion times ``rad / (eps (1 - 2 eps))``; the first point never leaves."""
    epsilon = check_epsilon(epsilon)
    time = perm.rad / epsilon / (1 - 2 * epsilon)
    time[0] = inf
    return DeletionSchedule(epsilon, time)


def level(sched: DeletionSchedule, alpha: float) -> np.ndarray:
    """Ranks of the points whose deletion time is strictly greater than ``alpha``."""
    return np.flatnonzero(sched.time > alpha)


def kcenter_cost(space: FiniteMetricSpace, centers) -> float:
    sub = space.matrix()[:, list(centers)]
    return float(sub.min(axis=1).max())


def optimal_kcenter(space: FiniteMetricSpace, k: int, cap: int = KCENTER_CAP) -> float:
    """Exact k-center cost by exhaustive search over all k-subsets of the points."""
    n = space.n
    if n > cap:
        raise ValueError(f"exhaustive k-center limited to {cap} points, got {n} "
                         f"({comb(n, k)} subsets)")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    mat = space.matrix()
    subsets = np.array(list(combinations(range(n), k)))
    # (subsets, n, k) -> nearest-centre distance per point -> worst point
    costs = mat[:, subsets].transpose(1, 0, 2).min(axis=2).max(axis=1)
    return float(costs.min())


#: exponent of the default prefix size, k = ceil(n ** AUTO_EXPONENT)
AUTO_EXPONENT = 0.727


def resolve_k(k, n: int) -> int:
    """Turn ``"auto"`` or an integer into a prefix size in ``[1, n]``."""
    if isinstance(k, str):
        if k != "auto":
            raise ValueError(f"k must be a positive integer or 'auto', got {k!r}")
        return min(n, max(1, ceil(n ** AUTO_EXPONENT)))
    if isinstance(k, bool) or int(k) != k:
        raise ValueError(f"k must be a positive integer or 'auto', got {k!r}")
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    return k
