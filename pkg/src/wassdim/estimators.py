"""scikit-learn compatible wrappers around the functional API."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dimension import DEFAULT_SCALES, EstimatorConfig, estimate_dimension, mle_estimate
from .metricgraph import connected_knn_graph, extend_to_points, geodesic_matrix


def _check_seed(random_state):
    if random_state is None or isinstance(random_state, (int, np.integer)):
        return random_state
    raise TypeError(
        f"random_state must be an int or None, got {type(random_state).__name__}; "
        "seeded streams are derived from an integer seed"
    )


class WassersteinDimension(BaseEstimator):
    """Intrinsic dimension from the decay rate of W1 between subsamples.

    Parameters
    ----------
    scales : sequence of int
        Sample sizes ``2**k`` used in the log-log regression.
    metric : {"euclidean", "graph", "both"}
        Ground metric(s) for the transport cost. ``"graph"`` uses shortest
        paths on a kNN graph pooled over every sampled point.
    ot : {"exact", "sinkhorn"}
        Exact assignment or entropic Sinkhorn.
    reg, max_iters, tol : float, int, float
        Sinkhorn settings (ignored for exact OT). ``reg`` is absolute.
    n_neighbors : int or None
        Starting k of the kNN graph; doubled until the graph is connected.
    repetitions : int
        W1 evaluations per scale, averaged in log space.
    disjoint_scales : {"auto", True, False}
        Whether different scales use disjoint subsamples.
    random_state : int or None

    Attributes
    ----------
    dimension_ : float
        Graph-metric estimate when computed, else the Euclidean one.
    estimate_euclidean_, estimate_geodesic_ : DimensionEstimate or None
    """

    def __init__(
        self,
        scales=DEFAULT_SCALES,
        metric="both",
        ot="exact",
        reg=0.1,
        max_iters=None,
        tol=1e-9,
        n_neighbors=None,
        repetitions=1,
        disjoint_scales="auto",
        random_state=0,
    ):
        self.scales = scales
        self.metric = metric
        self.ot = ot
        self.reg = reg
        self.max_iters = max_iters
        self.tol = tol
        self.n_neighbors = n_neighbors
        self.repetitions = repetitions
        self.disjoint_scales = disjoint_scales
        self.random_state = random_state

    def _config(self):
        return EstimatorConfig(
            scales=tuple(self.scales),
            metric=self.metric,
            ot=self.ot,
            reg=self.reg,
            max_iters=self.max_iters,
            tol=self.tol,
            knn=self.n_neighbors,
            repetitions=self.repetitions,
            disjoint_scales=self.disjoint_scales,
            seed=_check_seed(self.random_state),
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        self.estimate_euclidean_, self.estimate_geodesic_ = estimate_dimension(X, self._config())
        primary = self.estimate_geodesic_ or self.estimate_euclidean_
        self.dimension_ = primary.d_hat
        return self


class MLEDimension(BaseEstimator):
    """Levina-Bickel nearest-neighbor MLE of intrinsic dimension."""

    def __init__(self, n_neighbors=10):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=3)
        self.n_features_in_ = X.shape[1]
        est = mle_estimate(X, self.n_neighbors)
        self.estimate_ = est
        self.dimension_ = est.d_hat
        self.n_skipped_ = est.metadata["n_skipped"]
        return self


class GeodesicDistance(TransformerMixin, BaseEstimator):
    """Graph-geodesic distances to the training points.

    ``fit`` builds a connected kNN graph over the training points (the
    anchors). ``transform`` maps each query to its row of graph distances to
    every anchor, attaching the query through its nearest anchor.
    """

    def __init__(self, n_neighbors=None):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        graph, self.n_neighbors_ = connected_knn_graph(X, self.n_neighbors)
        self.anchors_ = X
        self.graph_ = graph
        self.distances_ = geodesic_matrix(graph).values
        return self

    def transform(self, X):
        check_is_fitted(self, "distances_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return extend_to_points(self.distances_, self.anchors_, X, self.anchors_)
