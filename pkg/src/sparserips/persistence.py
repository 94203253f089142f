"""Persistence diagrams over the two-element field.

:func:`reduce_standard` handles ascending filtrations by the usual column
reduction.  :func:`zigzag_persistence` handles arbitrary add/remove streams
by padding the stream to the empty complex, reordering it into an
up-down sequence, coning off the removals, and reducing the resulting
ascending filtration (the FastZigzag construction of Dey and Hou, 2022).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from math import inf

import numpy as np
from numba import njit

from .complex import Event, SimplicialComplex, ZigzagEventStream, facets

#: tolerance used when comparing diagrams as multisets
DIAGRAM_TOL = 1e-9


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of ``(dim, birth, death)`` points, kept sorted.

    ``n_zero_length`` counts intervals that were born and killed at the same
    scale; they are dropped from ``points``.  It is bookkeeping only and
    does not take part in equality.
    """

    points: tuple = ()
    n_zero_length: int = field(default=0, compare=False)

    def __post_init__(self):
        pts = []
        for dim, b, d in self.points:
            b, d = float(b), float(d)
            if d < b:
                raise ValueError(f"death {d} precedes birth {b}")
            pts.append((int(dim), b, d))
        object.__setattr__(self, "points", tuple(sorted(pts)))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def dims(self) -> list[int]:
        return sorted({p[0] for p in self.points})

    def in_dim(self, dim: int) -> np.ndarray:
        """``(m, 2)`` array of the (birth, death) pairs in one dimension."""
        return np.array([(b, d) for k, b, d in self.points if k == dim], dtype=float).reshape(-1, 2)

    def essential(self, dim: int | None = None) -> list[tuple]:
        return [p for p in self.points if math.isinf(p[2]) and (dim is None or p[0] == dim)]

    def restrict(self, max_dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram(tuple(p for p in self.points if p[0] <= max_dim), self.n_zero_length)

    def drop_short(self, tol: float = DIAGRAM_TOL) -> "PersistenceDiagram":
        """Remove points whose persistence is at most ``tol``."""
        return PersistenceDiagram(tuple(p for p in self.points if p[2] - p[1] > tol), self.n_zero_length)

    def count_alive(self, alpha: float, dim: int) -> int:
        """Number of intervals ``[b, d)`` in ``dim`` that contain ``alpha``."""
        return sum(1 for k, b, d in self.points if k == dim and b <= alpha < d)

    def isclose(self, other: "PersistenceDiagram", tol: float = DIAGRAM_TOL) -> bool:
        """Multiset equality up to ``tol`` per coordinate, ignoring points of persistence <= ``tol``."""
        a, b = self.drop_short(tol).points, other.drop_short(tol).points
        if len(a) != len(b):
            return False
        for (ka, ba, da), (kb, bb, db) in zip(a, b):
            if ka != kb or abs(ba - bb) > tol:
                return False
            if math.isinf(da) or math.isinf(db):
                if da != db:
                    return False
            elif abs(da - db) > tol:
                return False
        return True

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            fh.write("dim,birth,death\n")
            for k, b, d in self.points:
                death = "inf" if math.isinf(d) else f"{d:.17g}"
                fh.write(f"{k},{b:.17g},{death}\n")
        finally:
            if own:
                fh.close()

    @classmethod
    def from_csv(cls, path) -> "PersistenceDiagram":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = csv.reader(fh)
            if next(rows, None) != ["dim", "birth", "death"]:
                raise ValueError("diagram file must start with the header dim,birth,death")
            return cls(tuple((int(r[0]), float(r[1]), float(r[2])) for r in rows if r))


@njit(cache=True)
def _symdiff(a, b):
    """Symmetric difference of two sorted int arrays (addition over Z2)."""
    out = np.empty(len(a) + len(b), np.int64)
    i = j = m = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out[m] = a[i]
            i += 1
            m += 1
        elif b[j] < a[i]:
            out[m] = b[j]
            j += 1
            m += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[m] = a[i]
        i += 1
        m += 1
    while j < len(b):
        out[m] = b[j]
        j += 1
        m += 1
    return out[:m]


@njit(cache=True)
def _reduce_csr(indptr, indices, order):
    """Column reduction with clearing over Z2.

    Columns are sorted row lists in CSR form and are visited in ``order``.
    Returns ``pivot`` with ``pivot[row] = column`` for every pair and -1
    elsewhere.  A column that is already somebody's pivot row is a creator
    and is skipped without reduction.
    """
    n = len(indptr) - 1
    pivot = np.full(n, -1, np.int64)
    start = np.zeros(n, np.int64)
    length = np.zeros(n, np.int64)
    buf = np.empty(max(16, 2 * len(indices)), np.int64)
    used = 0
    for j in order:
        if pivot[j] != -1 or indptr[j] == indptr[j + 1]:
            continue
        col = indices[indptr[j]:indptr[j + 1]].copy()
        while len(col) > 0:
            low = col[-1]
            other = pivot[low]
            if other == -1:
                pivot[low] = j
                if used + len(col) > len(buf):
                    bigger = np.empty(2 * (used + len(col)), np.int64)
                    bigger[:used] = buf[:used]
                    buf = bigger
                buf[used:used + len(col)] = col
                start[j] = used
                length[j] = len(col)
                used += len(col)
                break
            col = _symdiff(col, buf[start[other]:start[other] + length[other]])
    return pivot


def _reduce(boundaries: list, dims: list) -> dict:
    """Pair creators with destroyers.  Returns ``{creator: destroyer}``.

    ``boundaries[j]`` lists the row indices of column ``j`` (faces come
    before cofaces).  Dimensions are processed from the top down so that
    clearing can skip columns already known to be creators.
    """
    lengths = np.fromiter((len(b) for b in boundaries), np.int64, len(boundaries))
    indptr = np.zeros(len(boundaries) + 1, np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.fromiter((r for b in boundaries for r in sorted(b)), np.int64, int(indptr[-1]))
    dims = np.asarray(dims, np.int64)
    order = np.lexsort((np.arange(len(dims)), -dims)).astype(np.int64)
    pivot = _reduce_csr(indptr, indices, order)
    rows = np.flatnonzero(pivot >= 0)
    return dict(zip(rows.tolist(), pivot[rows].tolist()))


def warmup() -> None:
    """Compile the reduction kernel ahead of time (it is cached on disk afterwards)."""
    _reduce([[], [], [0, 1]], [0, 0, 1])


def _finish(pairs, essentials, max_dim) -> PersistenceDiagram:
    pts, zero = [], 0
    for dim, b, d in pairs:
        if dim > max_dim or dim < 0:
            continue
        if b == d:
            zero += 1
        else:
            pts.append((dim, b, d))
    pts += [(dim, b, inf) for dim, b in essentials if dim <= max_dim]
    return PersistenceDiagram(tuple(pts), zero)


def reduce_standard(stream: ZigzagEventStream, max_dim: int | None = None) -> PersistenceDiagram:
    """Persistence diagram of an ascending filtration given as an Add-only stream.

    ``max_dim`` is the top homology dimension reported; by default one less
    than the top simplex dimension, the highest dimension whose homology
    the stream determines.
    """
    if not stream.is_ascending:
        raise ValueError("reduce_standard needs an Add-only stream")
    stream.validate()
    if max_dim is None:
        max_dim = max(stream.max_simplex_dim - 1, 0)
    index = {e.simplex: n for n, e in enumerate(stream.events)}
    boundaries = [[index[f] for f in facets(e.simplex)] for e in stream.events]
    dims = [len(e.simplex) - 1 for e in stream.events]
    pivot = _reduce(boundaries, dims)
    alpha = [e.alpha for e in stream.events]
    pairs = [(dims[i], alpha[i], alpha[j]) for i, j in pivot.items()]
    paired = set(pivot) | set(pivot.values())
    essentials = [(dims[i], alpha[i]) for i in range(len(dims)) if i not in paired]
    return _finish(pairs, essentials, max_dim)


def _pad(stream: ZigzagEventStream) -> list:
    """The stream followed by removals at infinity of whatever is left."""
    left = stream.replay()
    tail = sorted(left, key=lambda s: (-len(s), s))
    return list(stream.events) + [Event(inf, "REMOVE", s) for s in tail]


def zigzag_persistence(
    stream: ZigzagEventStream, max_dim: int | None = None, check: bool = True
) -> PersistenceDiagram:
    """Interval decomposition of the zigzag module of a valid event stream.

    Intervals are half-open ``[b, d)`` in scale; a class still alive at the
    end of the stream has ``d = inf``.  ``max_dim`` defaults as in
    :func:`reduce_standard`, and on Add-only streams the two functions agree
    exactly.  ``check=False`` skips :meth:`ZigzagEventStream.validate` for
    streams that are valid by construction.
    """
    if check:
        stream.validate()
    if max_dim is None:
        max_dim = max(stream.max_simplex_dim - 1, 0)
    events = _pad(stream)
    adds = [n for n, e in enumerate(events) if e.op == "ADD"]
    removes = [n for n, e in enumerate(events) if e.op == "REMOVE"]
    m = len(adds)

    # cone filtration: apex, every simplex in addition order, then the cones
    # over removed simplices in reverse removal order
    index = {events[n].simplex: 1 + r for r, n in enumerate(adds)}
    cone_index = {events[n].simplex: 1 + m + r for r, n in enumerate(reversed(removes))}
    boundaries: list = [[]]
    dims = [0]
    source = [None]  # G cell -> stream event index
    for n in adds:
        s = events[n].simplex
        boundaries.append([index[f] for f in facets(s)])
        dims.append(len(s) - 1)
        source.append(n)
    for n in reversed(removes):
        s = events[n].simplex
        col = [index[s]] + ([cone_index[f] for f in facets(s)] if len(s) > 1 else [0])
        boundaries.append(col)
        dims.append(len(s))
        source.append(n)

    pivot = _reduce(boundaries, dims)
    pairs = []
    for g1, g2 in pivot.items():
        e1, e2 = source[g1], source[g2]
        if g1 == 0 or events[min(e1, e2)].alpha == inf:
            continue  # apex, or a pair made entirely of padding
        # the up-down reordering may swap the two events; whichever comes
        # first in the original stream creates the bar
        creator, destroyer = min(e1, e2), max(e1, e2)
        first = events[creator]
        dim = len(first.simplex) - 1 if first.op == "ADD" else len(first.simplex) - 2
        b, d = first.alpha, events[destroyer].alpha
        pairs.append((dim, b, d))
    return _finish(pairs, [], max_dim)


def _gf2_rank(vectors) -> int:
    pivots: dict = {}
    rank = 0
    for v in vectors:
        while v:
            h = v.bit_length() - 1
            if h in pivots:
                v ^= pivots[h]
            else:
                pivots[h] = v
                rank += 1
                break
    return rank


def _boundary_rank(cx: SimplicialComplex, dim: int) -> int:
    if dim <= 0:
        return 0
    rows = {s: r for r, s in enumerate(cx.simplices(dim - 1))}
    vectors = []
    for s in cx.simplices(dim):
        v = 0
        for f in facets(s):
            v |= 1 << rows[f]
        vectors.append(v)
    return _gf2_rank(vectors)


def homology_rank(cx: SimplicialComplex, dim: int) -> int:
    """Dimension of ``H_dim`` over the two-element field, by Gaussian elimination."""
    if dim < 0:
        return 0
    n_simplices = len(cx.simplices(dim))
    return n_simplices - _boundary_rank(cx, dim) - _boundary_rank(cx, dim + 1)


def betti_numbers(cx: SimplicialComplex, max_dim: int | None = None) -> list[int]:
    top = cx.dimension if max_dim is None else max_dim
    return [homology_rank(cx, d) for d in range(top + 1)]
