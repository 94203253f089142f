"""scikit-learn style front ends for the traversal and the persistence pipelines."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .complex import EXACT_CAP, sparse_zigzag_events, vr_filtration_events
from .greedy import check_epsilon, farthest_first, resolve_k
from .metric import METRIC_KINDS, FiniteMetricSpace, from_matrix, from_points
from .persistence import PersistenceDiagram, reduce_standard, zigzag_persistence
from .sparse import LevelHierarchy


def check_metric_input(X, metric: str = "euclidean") -> FiniteMetricSpace:
    """Validate ``X`` and wrap it as a metric space.

    ``metric="precomputed"`` treats ``X`` as a square distance table;
    otherwise ``X`` is an ``(n_samples, n_features)`` array of coordinates.
    """
    if isinstance(X, FiniteMetricSpace):
        return X
    if metric == "precomputed":
        X = check_array(X, dtype=float)
        if X.shape[0] != X.shape[1]:
            raise ValueError(f"a precomputed distance table must be square, got shape {X.shape}")
        return from_matrix(X)
    if metric not in METRIC_KINDS:
        raise ValueError(f"unknown metric {metric!r}; expected 'precomputed' or one of {sorted(METRIC_KINDS)}")
    return from_points(check_array(X, dtype=float), metric)


class FarthestPointSampler(TransformerMixin, BaseEstimator):
    """Select ``k`` points by farthest-first traversal.

    Parameters
    ----------
    k : int or "auto", default="auto"
        Number of points kept; ``"auto"`` uses ``ceil(n ** 0.727)``.
    start : int, default=0
        Index of the first selected point.
    metric : str, default="euclidean"
        ``"euclidean"``, ``"manhattan"``, ``"chebyshev"`` or ``"precomputed"``.

    Attributes
    ----------
    order_ : ndarray of shape (k,)
        Selected indices in traversal order.
    radii_ : ndarray of shape (k,)
        Insertion radii (the first is ``inf``).
    covering_radius_ : float
        Largest distance from a point to the selected set.
    """

    def __init__(self, k="auto", start=0, metric="euclidean"):
        self.k = k
        self.start = start
        self.metric = metric

    def fit(self, X, y=None):
        space = check_metric_input(X, self.metric)
        perm = farthest_first(space, resolve_k(self.k, space.n), self.start)
        self.permutation_ = perm
        self.order_ = perm.order
        self.radii_ = perm.rad
        self.covering_radius_ = perm.covering_radius
        self.n_samples_fit_ = space.n
        return self

    def transform(self, X):
        """Rows of ``X`` at the selected indices (a sub-table for precomputed input)."""
        check_is_fitted(self, "order_")
        X = check_array(X, dtype=float)
        if X.shape[0] != self.n_samples_fit_:
            raise ValueError("transform expects the data the sampler was fitted on")
        if self.metric == "precomputed":
            return X[np.ix_(self.order_, self.order_)]
        return X[self.order_]


class SparseRipsPersistence(BaseEstimator):
    """Approximate Rips persistence through the sparse zigzag filtration.

    Parameters
    ----------
    epsilon : float, default=0.1
        Sparsity parameter in (0, 1/3); smaller is more accurate and slower.
    k : int or "auto", default="auto"
        Size of the farthest-first prefix.
    max_dim : int, default=1
        Highest homology dimension computed.
    start : int, default=0
        First point of the traversal.
    metric : str, default="euclidean"

    Attributes
    ----------
    diagram_ : PersistenceDiagram
    hierarchy_ : LevelHierarchy
    stream_ : ZigzagEventStream
    error_radius_ : float
        ``2 r / (1 - 2 eps)`` with ``r`` the covering radius of the prefix.
    """

    def __init__(self, epsilon=0.1, k="auto", max_dim=1, start=0, metric="euclidean"):
        self.epsilon = epsilon
        self.k = k
        self.max_dim = max_dim
        self.start = start
        self.metric = metric

    def _run(self, X):
        eps = check_epsilon(self.epsilon)
        if int(self.max_dim) < 0:
            raise ValueError("max_dim must be >= 0")
        space = check_metric_input(X, self.metric)
        hier = LevelHierarchy.from_space(space, resolve_k(self.k, space.n), eps, self.start)
        stream = sparse_zigzag_events(hier, int(self.max_dim))
        return hier, stream, zigzag_persistence(stream, int(self.max_dim), check=False)

    def fit(self, X, y=None):
        self.hierarchy_, self.stream_, self.diagram_ = self._run(X)
        self.n_updates_ = self.stream_.u
        self.error_radius_ = 2 * self.hierarchy_.perm.covering_radius / (1 - 2 * self.epsilon)
        return self

    def fit_transform(self, X, y=None) -> PersistenceDiagram:
        return self.fit(X).diagram_

    def transform(self, X) -> list[PersistenceDiagram]:
        """Diagrams of a sequence of datasets with the same parameters."""
        return [self._run(x)[2] for x in X]


class RipsPersistence(BaseEstimator):
    """Exact Rips persistence by brute-force filtration (small inputs only).

    Parameters
    ----------
    max_dim : int, default=1
        Highest homology dimension computed.
    metric : str, default="euclidean"
    max_points : int
        Refuse inputs with more points than this.
    """

    def __init__(self, max_dim=1, metric="euclidean", max_points=EXACT_CAP):
        self.max_dim = max_dim
        self.metric = metric
        self.max_points = max_points

    def _run(self, X) -> PersistenceDiagram:
        space = check_metric_input(X, self.metric)
        stream = vr_filtration_events(space, int(self.max_dim) + 1, cap=self.max_points)
        return reduce_standard(stream, int(self.max_dim))

    def fit(self, X, y=None):
        self.diagram_ = self._run(X)
        return self

    def fit_transform(self, X, y=None) -> PersistenceDiagram:
        return self.fit(X).diagram_

    def transform(self, X) -> list[PersistenceDiagram]:
        return [self._run(x) for x in X]
