"""Finite metric spaces built from point clouds or distance tables."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

#: absolute tolerance for metric comparisons (triangle inequality, band checks)
COMPARE_TOL = 1e-9
#: absolute tolerance when checking that a full distance table is symmetric
SYMMETRY_TOL = 1e-12

METRIC_KINDS = {"euclidean": "euclidean", "manhattan": "cityblock", "chebyshev": "chebyshev"}


class MetricError(ValueError):
    """Raised for malformed point clouds or distance tables."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    metric_kind: str = "euclidean"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise MetricError("a point cloud needs at least one point")
        if self.metric_kind not in METRIC_KINDS:
            raise MetricError(f"unknown metric {self.metric_kind!r}; expected one of {sorted(METRIC_KINDS)}")
        if not np.all(np.isfinite(pts)):
            raise MetricError("coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


class FiniteMetricSpace:
    """n points with a symmetric distance oracle.

    Backed either by an explicit n x n table or by a point cloud whose
    distances are evaluated on demand, so that a farthest-first traversal
    never has to materialise all n^2 distances.
    """

    def __init__(self, matrix=None, cloud: PointCloud | None = None):
        if (matrix is None) == (cloud is None):
            raise MetricError("give exactly one of matrix or cloud")
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.cloud = cloud
        if self._matrix is not None:
            self._matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return self.cloud.n if self._matrix is None else self._matrix.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        kind = "matrix" if self._matrix is not None else self.cloud.metric_kind
        return f"FiniteMetricSpace(n={self.n}, {kind})"

    def distance(self, i: int, j: int) -> float:
        if self._matrix is not None:
            return float(self._matrix[i, j])
        pts = self.cloud.points
        return float(cdist(pts[i:i + 1], pts[j:j + 1], METRIC_KINDS[self.cloud.metric_kind])[0, 0])

    def row(self, i: int) -> np.ndarray:
        """Distances from point ``i`` to every point, O(n)."""
        if self._matrix is not None:
            return self._matrix[i]
        pts = self.cloud.points
        return cdist(pts[i:i + 1], pts, METRIC_KINDS[self.cloud.metric_kind])[0]

    def submatrix(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        if self._matrix is not None:
            return self._matrix[np.ix_(idx, idx)]
        pts = self.cloud.points[idx]
        return cdist(pts, pts, METRIC_KINDS[self.cloud.metric_kind])

    def matrix(self) -> np.ndarray:
        """The full distance table (materialised for point clouds)."""
        if self._matrix is not None:
            return self._matrix
        return self.submatrix(np.arange(self.n))

    def subspace(self, idx) -> "FiniteMetricSpace":
        idx = np.asarray(idx, dtype=int)
        if self._matrix is not None:
            return FiniteMetricSpace(matrix=self.submatrix(idx))
        return FiniteMetricSpace(cloud=PointCloud(self.cloud.points[idx], self.cloud.metric_kind))


def from_points(cloud, metric: str = "euclidean") -> FiniteMetricSpace:
    """Metric space of a point cloud under the euclidean, manhattan or chebyshev norm."""
    if not isinstance(cloud, PointCloud):
        try:
            cloud = PointCloud(np.asarray(cloud, dtype=float), metric)
        except ValueError as exc:  # ragged input from numpy
            if isinstance(exc, MetricError):
                raise
            raise MetricError("all points must have the same number of coordinates") from exc
    return FiniteMetricSpace(cloud=cloud)


def from_matrix(entries) -> FiniteMetricSpace:
    """Metric space from a full square table or a ragged lower triangle.

    A lower triangle lists, for rows 1..n-1, the distances to the earlier
    points; row ``i`` therefore has ``i`` entries and the diagonal is zero.
    """
    rows = [list(map(float, np.atleast_1d(r))) for r in entries]
    if not rows:
        raise MetricError("empty distance table")
    lengths = [len(r) for r in rows]
    square_array = isinstance(entries, np.ndarray) and entries.ndim == 2
    if not square_array and lengths == list(range(1, len(rows) + 1)):
        n = len(rows) + 1
        mat = np.zeros((n, n))
        for i, r in enumerate(rows, start=1):
            mat[i, :i] = r
        mat = mat + mat.T
    elif all(m == len(rows) for m in lengths):
        mat = np.array(rows, dtype=float)
        if np.any(np.abs(np.diag(mat)) > 0):
            raise MetricError("nonzero diagonal entry")
        if np.any(np.abs(mat - mat.T) > SYMMETRY_TOL):
            raise MetricError("asymmetric distance table")
        mat = (mat + mat.T) / 2
    else:
        raise MetricError("table is neither square nor lower-triangular")
    if not np.all(np.isfinite(mat)):
        raise MetricError("distances must be finite")
    if np.any(mat < 0):
        raise MetricError("negative distance")
    return FiniteMetricSpace(matrix=mat)


def _distinct_pair_distances(space: FiniteMetricSpace) -> np.ndarray:
    mat = space.matrix()
    return mat[np.triu_indices(space.n, k=1)]


def spread(space: FiniteMetricSpace) -> float:
    """Ratio of the largest to the smallest distance between distinct points."""
    if space.n < 2:
        raise MetricError("spread needs at least two points")
    d = _distinct_pair_distances(space)
    lo = d.min()
    if lo == 0:
        return float("inf")
    return float(d.max() / lo)


def validate_triangle(space: FiniteMetricSpace, tol: float = COMPARE_TOL) -> list[tuple[int, int, int]]:
    """Triples ``(i, k, j)`` with ``i < k`` and ``dist(i, k) > dist(i, j) + dist(j, k) + tol``."""
    mat = space.matrix()
    bad = []
    for j in range(space.n):
        via = mat[:, j][:, None] + mat[j, :][None, :]
        ii, kk = np.nonzero(np.triu(mat > via + tol, k=1))
        bad.extend((int(i), int(k), j) for i, k in zip(ii, kk))
    return sorted(bad)


def _data_lines(path):
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def read_points(path, metric: str = "euclidean") -> FiniteMetricSpace:
    """Read one point per line, comma-separated coordinates, ``#`` comments."""
    rows = []
    for line in _data_lines(path):
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as exc:
            raise MetricError(f"bad coordinate in line {line!r}") from exc
    if not rows:
        raise MetricError("empty point file")
    if len({len(r) for r in rows}) != 1:
        raise MetricError("all points must have the same number of coordinates")
    return from_points(PointCloud(np.array(rows), metric))


def read_matrix(path) -> FiniteMetricSpace:
    rows = []
    for line in _data_lines(path):
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as exc:
            raise MetricError(f"bad distance in line {line!r}") from exc
    return from_matrix(rows)


def write_points(path, points) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    Path(path).write_text("".join(",".join(repr(float(x)) for x in p) + "\n" for p in pts), encoding="utf-8")
