"""Subquadratic approximation of Vietoris-Rips persistence by sparse zigzag filtrations."""
from .complex import (Event, InvalidStreamError, SimplicialComplex, ZigzagEventStream, build_rvr,
                      build_svr, build_vr, rvr_filtration_events, sparse_zigzag_events,
                      vr_filtration_events)
from .diagram import (ComparisonReport, additive_band_check, bottleneck, l1_offset_contained,
                      multiplicative_band_check, offset_radius)
from .estimators import FarthestPointSampler, RipsPersistence, SparseRipsPersistence
from .greedy import (DeletionSchedule, GreedyPermutation, farthest_first, kcenter_cost, level,
                     optimal_kcenter, resolve_k, schedule)
from .metric import FiniteMetricSpace, MetricError, PointCloud, from_matrix, from_points, spread, validate_triangle
from .persistence import PersistenceDiagram, homology_rank, reduce_standard, zigzag_persistence
from .sparse import CriticalEvent, LevelHierarchy, critical_events, edge_root, weight

__version__ = "0.1.0"
