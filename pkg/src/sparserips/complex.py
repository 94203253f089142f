"""Flag complexes, Rips builders and zigzag event streams.

Simplices are sorted tuples of point indices of the metric space.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .metric import FiniteMetricSpace
from .sparse import LevelHierarchy, critical_events

#: largest space accepted by the exact (brute-force) Rips filtration
EXACT_CAP = 25

Simplex = tuple


class InvalidStreamError(ValueError):
    """An event stream that does not describe a sequence of simplicial complexes."""


def facets(simplex: Simplex) -> list[Simplex]:
    if len(simplex) == 1:
        return []
    return [simplex[:m] + simplex[m + 1:] for m in range(len(simplex))]


def _simplex_key(s: Simplex):
    return (len(s), s)


class SimplicialComplex:
    """An immutable finite set of simplices.

    Closure under faces is not enforced on construction; :meth:`is_closed`
    checks it.
    """

    def __init__(self, simplices: Iterable = ()):
        self._simplices = frozenset(tuple(sorted(int(v) for v in s)) for s in simplices)

    def __contains__(self, simplex) -> bool:
        return tuple(sorted(simplex)) in self._simplices

    def __iter__(self) -> Iterator[Simplex]:
        return iter(sorted(self._simplices, key=_simplex_key))

    def __len__(self):
        return len(self._simplices)

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self._simplices == other._simplices

    def __le__(self, other: "SimplicialComplex"):
        return self._simplices <= other._simplices

    def __hash__(self):
        return hash(self._simplices)

    def __repr__(self):
        return f"SimplicialComplex(f_vector={self.f_vector()})"

    @property
    def simplex_set(self) -> frozenset:
        return self._simplices

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self._simplices), default=-1)

    def vertices(self) -> list[int]:
        return sorted(s[0] for s in self._simplices if len(s) == 1)

    def simplices(self, dim: int | None = None) -> list[Simplex]:
        if dim is None:
            return list(self)
        return sorted(s for s in self._simplices if len(s) == dim + 1)

    def f_vector(self) -> list[int]:
        counts = [0] * (self.dimension + 1)
        for s in self._simplices:
            counts[len(s) - 1] += 1
        return counts

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))

    def is_closed(self) -> bool:
        return all(f in self._simplices for s in self._simplices for f in facets(s))

    def maximal_simplex_lists(self, rank_of: dict[int, int]) -> dict[int, list[frozenset]]:
        """For each vertex ``v``, the maximal simplices whose top-ranked vertex is ``v``.

        Each entry is stored without ``v`` itself, i.e. as a subset of
        lower-ranked vertices; together with ``v`` it spans a maximal simplex.
        """
        cofaced = set()
        for s in self._simplices:
            cofaced.update(facets(s))
        maximal = [s for s in self._simplices if s not in cofaced]
        lists: dict[int, list[frozenset]] = defaultdict(list)
        for s in maximal:
            top = max(s, key=lambda v: rank_of[v])
            lists[top].append(frozenset(v for v in s if v != top))
        return {v: sorted(c, key=sorted) for v, c in lists.items()}


def flag_simplices(vertices: Iterable[int], adjacency: dict, max_dim: int) -> list[Simplex]:
    """All cliques of at most ``max_dim + 1`` vertices, sorted by dimension then lexicographically."""
    out: list[Simplex] = []

    def extend(simplex, candidates):
        out.append(simplex)
        if len(simplex) > max_dim:
            return
        for m, v in enumerate(candidates):
            nbrs = adjacency[v]
            extend(simplex + (v,), [w for w in candidates[m + 1:] if w in nbrs])

    keep = set(vertices)
    for v in sorted(keep):
        extend((v,), sorted(w for w in adjacency[v] if w > v and w in keep))
    out.sort(key=_simplex_key)
    return out


def _adjacency(ids, within: np.ndarray) -> dict:
    ids = list(ids)
    adj = {v: set() for v in ids}
    ii, jj = np.nonzero(np.triu(within, k=1))
    for a, b in zip(ii, jj):
        adj[ids[a]].add(ids[b])
        adj[ids[b]].add(ids[a])
    return adj


def build_vr(space: FiniteMetricSpace, alpha: float, max_dim: int) -> SimplicialComplex:
    """Rips complex at scale ``alpha``, simplices up to dimension ``max_dim``."""
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    ids = range(space.n)
    adj = _adjacency(ids, space.matrix() <= alpha)
    return SimplicialComplex(flag_simplices(ids, adj, max_dim))


def build_rvr(hier: LevelHierarchy, alpha: float, max_dim: int) -> SimplicialComplex:
    """Relaxed Rips complex on every selected point (no level restriction).

    An edge is present once ``alpha`` reaches its root.  Since the relaxed
    distance minus ``alpha`` is non-increasing this is the same as
    ``D_alpha <= alpha``, and it agrees bit for bit with the event streams.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    ids = [hier.point(r) for r in range(hier.k)]
    adj = _adjacency(ids, hier.root_matrix <= alpha)
    return SimplicialComplex(flag_simplices(ids, adj, max_dim))


def build_svr(hier: LevelHierarchy, alpha: float, max_dim: int) -> SimplicialComplex:
    """Relaxed Rips complex restricted to the level at ``alpha``."""
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    lvl = hier.level(alpha)
    ids = [hier.point(r) for r in lvl]
    within = hier.root_matrix[np.ix_(lvl, lvl)] <= alpha
    adj = _adjacency(ids, within)
    return SimplicialComplex(flag_simplices(ids, adj, max_dim))


class Event(NamedTuple):
    alpha: float
    op: str  # "ADD" or "REMOVE"
    simplex: Simplex


@dataclass
class ZigzagEventStream:
    """Single-simplex additions and removals, each tagged with its scale."""

    events: list = field(default_factory=list)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, item):
        return self.events[item]

    @property
    def u(self) -> int:
        """Number of updates."""
        return len(self.events)

    @property
    def is_ascending(self) -> bool:
        return all(e.op == "ADD" for e in self.events)

    @property
    def max_simplex_dim(self) -> int:
        return max((len(e.simplex) - 1 for e in self.events), default=-1)

    def validate(self, allow_readd: bool = False) -> None:
        """Raise :class:`InvalidStreamError` unless every prefix is a simplicial complex.

        Additions need all facets present, removals need no cofaces present,
        scales never decrease, and a removed simplex is never added again
        (unless ``allow_readd``).
        """
        present: set = set()
        removed: set = set()
        cofaces: dict = defaultdict(int)
        last = -np.inf
        for n, (alpha, op, s) in enumerate(self.events):
            if alpha < last:
                raise InvalidStreamError(f"event {n}: scale decreases ({alpha} < {last})")
            last = alpha
            if list(s) != sorted(set(s)) or not s:
                raise InvalidStreamError(f"event {n}: simplex {s} is not a sorted vertex tuple")
            if op == "ADD":
                if s in present:
                    raise InvalidStreamError(f"event {n}: {s} added twice")
                if s in removed and not allow_readd:
                    raise InvalidStreamError(f"event {n}: {s} re-added after removal")
                for f in facets(s):
                    if f not in present:
                        raise InvalidStreamError(f"event {n}: face {f} of {s} missing")
                    cofaces[f] += 1
                present.add(s)
            elif op == "REMOVE":
                if s not in present:
                    raise InvalidStreamError(f"event {n}: {s} removed but absent")
                if cofaces[s]:
                    raise InvalidStreamError(f"event {n}: {s} removed while a coface is present")
                for f in facets(s):
                    cofaces[f] -= 1
                present.discard(s)
                removed.add(s)
            else:
                raise InvalidStreamError(f"event {n}: unknown operation {op!r}")

    def replay(self, stop: int | None = None) -> set:
        """Simplices present after the first ``stop`` events."""
        present: set = set()
        for e in self.events[:stop]:
            if e.op == "ADD":
                present.add(e.simplex)
            else:
                present.discard(e.simplex)
        return present

    def snapshot(self, alpha: float) -> SimplicialComplex:
        """Complex after every event with scale ``<= alpha`` has been applied."""
        stop = 0
        while stop < len(self.events) and self.events[stop].alpha <= alpha:
            stop += 1
        return SimplicialComplex(self.replay(stop))

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            fh.write("alpha,op,simplex\n")
            for alpha, op, s in self.events:
                fh.write(f"{alpha:.17g},{op},{'-'.join(map(str, s))}\n")
        finally:
            if own:
                fh.close()

    @classmethod
    def from_csv(cls, path) -> "ZigzagEventStream":
        events = []
        with open(path, newline="", encoding="utf-8") as fh:
            rows = csv.reader(fh)
            if next(rows, None) != ["alpha", "op", "simplex"]:
                raise InvalidStreamError("stream file must start with the header alpha,op,simplex")
            for row in rows:
                if len(row) != 3 or row[1] not in ("ADD", "REMOVE"):
                    raise InvalidStreamError(f"malformed stream row {row}")
                events.append(Event(float(row[0]), row[1], tuple(int(v) for v in row[2].split("-"))))
        return cls(events)


def sparse_zigzag_events(hier: LevelHierarchy, max_dim: int = 1) -> ZigzagEventStream:
    """Zigzag stream of the sparse relaxed Rips complexes on the selected prefix.

    All selected vertices enter at scale 0.  At an edge's critical value the
    edge is added together with every clique it closes; at a vertex's
    deletion time the vertex leaves with everything incident to it.
    Simplices are generated up to dimension ``max_dim + 1`` so that
    homology in dimension ``max_dim`` is complete.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    top = max_dim + 1
    order = [int(p) for p in hier.perm.order]
    adj: dict[int, set] = {p: set() for p in order}
    events = [Event(0.0, "ADD", (p,)) for p in order]
    for ev in critical_events(hier):
        if ev.kind == "EDGE":
            u, v = sorted((order[ev.i], order[ev.j]))
            common = adj[u] & adj[v]
            new = [tuple(sorted((u, v) + q)) for q in flag_simplices(common, adj, top - 2)] if top >= 2 else []
            new.append((u, v))
            new.sort(key=_simplex_key)
            events.extend(Event(ev.alpha, "ADD", s) for s in new)
            adj[u].add(v)
            adj[v].add(u)
        else:
            u = order[ev.i]
            nbrs = adj.pop(u)
            gone = [tuple(sorted((u,) + q)) for q in flag_simplices(nbrs, adj, top - 1)] if top >= 1 else []
            gone.append((u,))
            gone.sort(key=lambda s: (-len(s), s))
            events.extend(Event(ev.alpha, "REMOVE", s) for s in gone)
            for w in nbrs:
                adj[w].discard(u)
    return ZigzagEventStream(events)


def _filtration(ids, births: np.ndarray, max_dim: int) -> ZigzagEventStream:
    """Ascending flag filtration: a simplex enters at the largest birth among its edges."""
    ids = list(ids)
    m = len(ids)
    items = []
    for size in range(1, min(max_dim + 1, m) + 1):
        for idx in combinations(range(m), size):
            a = 0.0 if size == 1 else max(births[x, y] for x, y in combinations(idx, 2))
            items.append((float(a), size, tuple(sorted(ids[x] for x in idx))))
    items.sort()
    return ZigzagEventStream([Event(a, "ADD", s) for a, _, s in items])


def vr_filtration_events(space: FiniteMetricSpace, max_dim: int, cap: int = EXACT_CAP) -> ZigzagEventStream:
    """Every simplex up to ``max_dim`` at its Rips birth scale (largest edge length)."""
    if space.n > cap:
        raise ValueError(f"exact Rips filtration limited to {cap} points, got {space.n}")
    return _filtration(range(space.n), space.matrix(), max_dim)


def rvr_filtration_events(hier: LevelHierarchy, max_dim: int, cap: int = EXACT_CAP) -> ZigzagEventStream:
    """Ascending relaxed Rips filtration on every selected point."""
    if hier.k > cap:
        raise ValueError(f"exact relaxed Rips filtration limited to {cap} points, got {hier.k}")
    return _filtration(hier.perm.order, hier.root_matrix, max_dim)
