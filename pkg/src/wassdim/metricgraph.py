"""Neighbor graphs and graph-geodesic distances.

The shortest-path distance on a neighbor graph with Euclidean edge weights
stands in for the (unknown) geodesic distance of the data manifold. Points
off the graph are attached through their nearest vertex.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from ._utils import check_cloud, euclidean, iter_distance_blocks

__all__ = [
    "DistanceMatrix",
    "NeighborGraph",
    "build_eps_graph",
    "build_knn_graph",
    "connected_knn_graph",
    "default_knn",
    "euclidean_matrix",
    "extend_to_points",
    "geodesic_matrix",
    "geodesic_rows",
    "pooled_metric",
]

EUCLIDEAN = "euclidean"
GRAPH_GEODESIC = "graph_geodesic"


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected weighted graph over point indices ``0..n-1``.

    ``adjacency`` is a symmetric CSR matrix whose stored entries are the edges
    (an explicit zero is a zero-length edge between duplicate points).
    """

    n: int
    adjacency: object
    construction: str
    parameter: float

    @property
    def edges(self):
        """Sorted ``(i, j, weight)`` triples with ``i < j``."""
        coo = self.adjacency.tocoo()
        keep = coo.row < coo.col
        order = np.lexsort((coo.col[keep], coo.row[keep]))
        return [
            (int(i), int(j), float(w))
            for i, j, w in zip(coo.row[keep][order], coo.col[keep][order], coo.data[keep][order])
        ]

    @property
    def degrees(self):
        return np.diff(self.adjacency.indptr)

    def n_components(self):
        return connected_components(self.adjacency, directed=False)[0]

    def is_connected(self):
        return self.n <= 1 or self.n_components() == 1


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    metric_kind: str = EUCLIDEAN
    disconnected: bool = False

    @property
    def n(self):
        return self.values.shape[0]

    def to_csv(self, path):
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def default_knn(n):
    """max(10, ceil(2 log2 n)), capped at n - 1."""
    k = max(10, math.ceil(2 * math.log2(max(n, 2))))
    return max(1, min(k, n - 1))


def _symmetric_graph(n, rows, cols, weights, construction, parameter):
    # Keep each unordered pair once; the weight is the same from either side.
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    w = np.concatenate([weights, weights])
    _, first = np.unique(r * np.int64(n) + c, return_index=True)
    adjacency = coo_matrix((w[first], (r[first], c[first])), shape=(n, n)).tocsr()
    return NeighborGraph(n, adjacency, construction, parameter)


def build_knn_graph(cloud, k):
    """Connect every point to its ``k`` nearest neighbors and symmetrize.

    An edge is kept when either endpoint selects the other. Ties at the k-th
    distance go to the lower index.
    """
    cloud = check_cloud(cloud, "cloud")
    n = cloud.shape[0]
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    if k >= n:
        raise ValueError(f"k must be < n = {n}, got {k}")
    rows, cols, weights = [], [], []
    for start, block in iter_distance_blocks(cloud):
        for r in range(block.shape[0]):
            i = start + r
            row = block[r].copy()
            row[i] = np.inf
            kth = np.partition(row, k - 1)[k - 1]
            below = np.flatnonzero(row < kth)
            tied = np.flatnonzero(row == kth)[: k - below.size]
            nbrs = np.concatenate([below, tied])
            rows.append(np.full(k, i, dtype=np.int64))
            cols.append(nbrs.astype(np.int64))
            weights.append(block[r, nbrs])
    return _symmetric_graph(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(weights), "knn", k
    )


def build_eps_graph(cloud, eps):
    """Connect every pair of points within Euclidean distance ``eps``."""
    cloud = check_cloud(cloud, "cloud")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = cloud.shape[0]
    rows, cols, weights = [], [], []
    for start, block in iter_distance_blocks(cloud):
        r, c = np.nonzero(block <= eps)
        r = r + start
        keep = r < c
        rows.append(r[keep])
        cols.append(c[keep])
        weights.append(block[r[keep] - start, c[keep]])
    return _symmetric_graph(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(weights), "epsilon", float(eps)
    )


def connected_knn_graph(cloud, k=None):
    """kNN graph with ``k`` doubled until the graph is connected.

    Returns ``(graph, k_used)``. ``k`` is capped at ``n - 1``, where the graph
    is complete and therefore connected.
    """
    cloud = check_cloud(cloud, "cloud")
    n = cloud.shape[0]
    if n == 1:
        empty = np.zeros(0, dtype=np.int64)
        return _symmetric_graph(1, empty, empty, np.zeros(0), "knn", 0), 0
    k = default_knn(n) if k is None else min(int(k), n - 1)
    while True:
        graph = build_knn_graph(cloud, k)
        if graph.is_connected() or k == n - 1:
            return graph, k
        k = min(2 * k, n - 1)


def geodesic_rows(graph, sources):
    """Shortest-path distances from each of ``sources`` to every vertex."""
    return dijkstra(graph.adjacency, directed=False, indices=np.asarray(sources, dtype=np.int64))


def geodesic_matrix(graph):
    """All-pairs graph distances; unreachable pairs are ``inf`` and flagged."""
    values = dijkstra(graph.adjacency, directed=False)
    values = np.minimum(values, values.T)
    return DistanceMatrix(values, GRAPH_GEODESIC, bool(np.isinf(values).any()))


def euclidean_matrix(cloud):
    cloud = check_cloud(cloud, "cloud")
    return DistanceMatrix(euclidean(cloud, cloud), EUCLIDEAN, False)


def _nearest_anchor(anchors, points):
    idx = np.empty(points.shape[0], dtype=np.int64)
    dist = np.empty(points.shape[0])
    for start, block in iter_distance_blocks(points, anchors):
        # argmin returns the first minimizer, i.e. the lowest anchor index.
        j = np.argmin(block, axis=1)
        idx[start:start + block.shape[0]] = j
        dist[start:start + block.shape[0]] = block[np.arange(block.shape[0]), j]
    return idx, dist


def extend_to_points(graph_metric, anchors, queries, others=None):
    """Graph distance between arbitrary points.

    ``d(p, q) = |p - a(p)| + d_graph(a(p), a(q)) + |q - a(q)|`` where ``a(.)``
    is the Euclidean-nearest anchor. Returns the ``len(queries) x len(others)``
    matrix (``others`` defaults to ``queries``).
    """
    anchors = check_cloud(anchors, "anchors", allow_empty=True)
    if anchors.shape[0] == 0:
        raise ValueError("anchor set is empty")
    values = graph_metric.values if isinstance(graph_metric, DistanceMatrix) else np.asarray(graph_metric)
    if values.shape != (anchors.shape[0], anchors.shape[0]):
        raise ValueError(
            f"graph metric has shape {values.shape}, expected {(anchors.shape[0],) * 2}"
        )
    queries = check_cloud(queries, "queries")
    others = queries if others is None else check_cloud(others, "others")
    ip, dp = _nearest_anchor(anchors, queries)
    iq, dq = _nearest_anchor(anchors, others)
    return dp[:, None] + values[np.ix_(ip, iq)] + dq[None, :]


def pooled_metric(all_points, kind="knn", k=None, eps=None):
    """Graph-geodesic matrix over a pool of points.

    With ``kind="knn"`` the neighbor count escalates until the pool is
    connected; an epsilon graph is returned as-is, disconnection flagged.
    """
    all_points = check_cloud(all_points, "all_points")
    if kind == "knn":
        graph, _ = connected_knn_graph(all_points, k)
    elif kind == "epsilon":
        if eps is None:
            raise ValueError("eps is required for an epsilon graph")
        graph = build_eps_graph(all_points, eps)
    else:
        raise ValueError(f"kind must be 'knn' or 'epsilon', got {kind!r}")
    return geodesic_matrix(graph)
