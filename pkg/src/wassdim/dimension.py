"""Intrinsic dimension from the decay of W1 between independent subsamples.

For a distribution on a d-dimensional manifold, the Wasserstein-1 distance
between two independent empirical measures of size n decays like n^(-1/d).
Fitting ``log2 W1`` against ``log2 n`` over several sample sizes therefore
gives ``d = -1 / slope``. The W1 costs can use Euclidean distances or graph
distances on a kNN graph built over all sampled points.
"""
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._utils import STREAM_SPLIT, check_cloud, euclidean, iter_distance_blocks, make_rng
from .metricgraph import EUCLIDEAN, GRAPH_GEODESIC, connected_knn_graph, geodesic_rows
from .ot import w1 as compute_w1

__all__ = [
    "DEFAULT_SCALES",
    "DimensionEstimate",
    "EstimationError",
    "EstimatorConfig",
    "NonDecreasingDecayError",
    "ScaleEntry",
    "ScaleSeries",
    "SplitPlan",
    "estimate_dimension",
    "make_split_plan",
    "mle_estimate",
    "ratio_estimate",
    "slope_estimate",
]

DEFAULT_SCALES = (5, 6, 7, 8, 9, 10)
METRICS = ("euclidean", "graph", "both")


class NonDecreasingDecayError(ValueError):
    """W1 did not decrease with sample size, so no dimension can be read off."""


class EstimationError(RuntimeError):
    """A pipeline stage failed; the message names the offending scale."""


@dataclass
class ScaleEntry:
    k: int
    w1: float
    transport: list = field(default_factory=list)

    @property
    def n(self):
        return 2 ** self.k


@dataclass
class ScaleSeries:
    """W1 values indexed by scale ``k`` (sample size ``n = 2**k``)."""

    entries: list

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: e.k)
        ks = [e.k for e in self.entries]
        if len(ks) < 2:
            raise ValueError(f"need at least 2 scales, got {len(ks)}")
        if len(set(ks)) != len(ks):
            raise ValueError(f"scales must be distinct, got {ks}")
        bad = [e.k for e in self.entries if not (e.w1 > 0 and math.isfinite(e.w1))]
        if bad:
            raise ValueError(f"W1 must be positive and finite; offending scales {bad}")

    @classmethod
    def from_values(cls, ks, w1s):
        return cls([ScaleEntry(int(k), float(w)) for k, w in zip(ks, w1s)])

    @property
    def ks(self):
        return np.array([e.k for e in self.entries], dtype=np.float64)

    @property
    def w1s(self):
        return np.array([e.w1 for e in self.entries], dtype=np.float64)


@dataclass
class DimensionEstimate:
    d_hat: float
    method: str
    metric_kind: str = EUCLIDEAN
    slope: float = None
    intercept: float = None
    scales: list = field(default_factory=list)
    w1: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def rss(self):
        return float(np.sum(np.square(self.residuals)))

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def ratio_estimate(w1_small, w1_large, alpha):
    """Two-sample estimate ``log(alpha) / (log W1(n) - log W1(alpha n))``."""
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1, got {alpha}")
    if not (w1_small > 0 and w1_large > 0):
        raise ValueError(f"W1 values must be positive, got {w1_small}, {w1_large}")
    denom = math.log(w1_small) - math.log(w1_large)
    if denom <= 0:
        raise NonDecreasingDecayError(
            f"W1 did not decrease from size n to {alpha}n ({w1_small} -> {w1_large})"
        )
    d = math.log(alpha) / denom
    return DimensionEstimate(
        d_hat=d, method="ratio", slope=-1.0 / d, metadata={"alpha": float(alpha)}
    )


def slope_estimate(series, metric_kind=EUCLIDEAN):
    """Least-squares fit of ``log2 W1`` on ``log2 n``; the dimension is ``-1/slope``."""
    if not isinstance(series, ScaleSeries):
        series = ScaleSeries(list(series))
    x = series.ks
    y = np.log2(series.w1s)
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    intercept = float(y.mean() - slope * x.mean())
    if slope >= 0:
        raise NonDecreasingDecayError(f"fitted slope {slope:.4g} is not negative")
    residuals = y - (intercept + slope * x)
    return DimensionEstimate(
        d_hat=-1.0 / slope,
        method="regression",
        metric_kind=metric_kind,
        slope=slope,
        intercept=intercept,
        scales=[int(k) for k in x],
        w1=[float(w) for w in series.w1s],
        residuals=[float(r) for r in residuals],
    )


def _knn_distances(cloud, k):
    """Sorted distances to the k nearest other points (self excluded by index)."""
    n = cloud.shape[0]
    out = np.empty((n, k))
    for start, block in iter_distance_blocks(cloud):
        rows = np.arange(block.shape[0])
        block[rows, start + rows] = np.inf
        part = np.partition(block, k - 1, axis=1)[:, :k]
        out[start:start + block.shape[0]] = np.sort(part, axis=1)
    return out


def mle_estimate(cloud, k):
    """Levina-Bickel maximum-likelihood estimate averaged over all points.

    Per point, ``m(x) = [(1/(k-1)) sum_{j<=k} log(T_k / T_j)]^-1`` with ``T_j``
    the distance to the j-th nearest neighbor. Points with a zero ``T_1``
    (duplicates) or with all k neighbors equidistant are skipped.
    """
    cloud = check_cloud(cloud, "cloud")
    n = cloud.shape[0]
    if int(k) != k or not 2 <= k < n:
        raise ValueError(f"k must satisfy 2 <= k < n = {n}, got {k}")
    k = int(k)
    t = _knn_distances(cloud, k)
    usable = t[:, 0] > 0
    sums = np.zeros(n)
    sums[usable] = np.log(t[usable, k - 1:k] / t[usable]).sum(axis=1)
    usable &= sums > 0
    if not usable.any():
        raise ValueError("every point has duplicate or equidistant neighbors")
    local = (k - 1) / sums[usable]
    return DimensionEstimate(
        d_hat=float(local.mean()),
        method="mle",
        metadata={"k": k, "n_skipped": int(n - usable.sum()), "local_std": float(local.std())},
    )


@dataclass
class SplitPlan:
    """Per-scale pairs of disjoint index sets of size ``2**k`` each."""

    seed: int
    n_total: int
    pairs: dict
    disjoint_scales: bool = False

    @property
    def scales(self):
        return sorted(self.pairs)

    def pool(self):
        """Sorted union of every index used by the plan."""
        return np.unique(np.concatenate([np.concatenate(p) for p in self.pairs.values()]))


def _required(scales, disjoint_scales):
    sizes = [2 * 2 ** k for k in scales]
    return sum(sizes) if disjoint_scales else max(sizes)


def make_split_plan(n_total, scales, seed=None, disjoint_scales=False, repetition=0):
    """Draw two disjoint subsets of size ``2**k`` for every scale ``k``.

    Each scale gets a fresh draw without replacement, so different scales may
    share points. With ``disjoint_scales`` all subsets of all scales are
    mutually disjoint, which is equivalent to fresh i.i.d. samples per scale
    when the cloud itself is i.i.d.
    """
    scales = sorted(int(k) for k in scales)
    if not scales:
        raise ValueError("scales must be nonempty")
    if len(set(scales)) != len(scales) or scales[0] < 0:
        raise ValueError(f"scales must be distinct nonnegative integers, got {scales}")
    need = _required(scales, disjoint_scales)
    if need > n_total:
        raise ValueError(
            f"scales {scales} need {need} points"
            f"{' (disjoint across scales)' if disjoint_scales else ''}, only {n_total} available"
        )
    rng = make_rng(seed, STREAM_SPLIT, repetition)
    if disjoint_scales:
        pairs = _disjoint_pairs(rng.permutation(n_total), scales, 0)
    else:
        pairs = {}
        for k in scales:
            draw = rng.choice(n_total, size=2 * 2 ** k, replace=False)
            pairs[k] = (np.sort(draw[:2 ** k]), np.sort(draw[2 ** k:]))
    return SplitPlan(seed, n_total, pairs, disjoint_scales)


def _disjoint_pairs(perm, scales, offset):
    pairs = {}
    pos = offset
    for k in scales:
        n = 2 ** k
        pairs[k] = (np.sort(perm[pos:pos + n]), np.sort(perm[pos + n:pos + 2 * n]))
        pos += 2 * n
    return pairs


@dataclass
class EstimatorConfig:
    """Settings of :func:`estimate_dimension`.

    ``reg`` is the absolute entropic regularization (cost units).
    ``disjoint_scales="auto"`` uses mutually disjoint subsamples whenever the
    cloud is large enough and falls back to per-scale draws otherwise.
    """

    scales: tuple = DEFAULT_SCALES
    metric: str = "both"
    ot: str = "exact"
    reg: float = 0.1
    max_iters: int = None
    tol: float = 1e-9
    knn: int = None
    repetitions: int = 1
    disjoint_scales: object = "auto"
    seed: int = 0

    def __post_init__(self):
        self.scales = tuple(int(k) for k in self.scales)
        if len(self.scales) < 2:
            raise ValueError(f"need at least 2 scales, got {list(self.scales)}")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must be strictly increasing, got {list(self.scales)}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.ot not in ("exact", "sinkhorn"):
            raise ValueError(f"ot must be 'exact' or 'sinkhorn', got {self.ot!r}")
        if self.ot == "sinkhorn" and not self.reg > 0:
            raise ValueError(f"reg must be positive, got {self.reg}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.disjoint_scales not in ("auto", True, False):
            raise ValueError(f"disjoint_scales must be 'auto', True or False, got {self.disjoint_scales!r}")

    def resolve_disjoint(self, n_total):
        if self.disjoint_scales == "auto":
            return self.repetitions * _required(self.scales, True) <= n_total
        return bool(self.disjoint_scales)


def _metric_kinds(metric):
    return {"euclidean": [EUCLIDEAN], "graph": [GRAPH_GEODESIC], "both": [EUCLIDEAN, GRAPH_GEODESIC]}[metric]


def _plans(n_total, config):
    disjoint = config.resolve_disjoint(n_total)
    if disjoint and config.repetitions > 1:
        # Consecutive slices of one permutation keep repetitions disjoint too;
        # repetition 0 coincides with the single-repetition plan.
        perm = make_rng(config.seed, STREAM_SPLIT, 0).permutation(n_total)
        block = _required(config.scales, True)
        return [
            SplitPlan(config.seed, n_total, _disjoint_pairs(perm, config.scales, r * block), True)
            for r in range(config.repetitions)
        ]
    return [
        make_split_plan(n_total, config.scales, seed=config.seed, disjoint_scales=disjoint, repetition=r)
        for r in range(config.repetitions)
    ]


def estimate_dimension(cloud, config=None):
    """Run the full multi-scale estimator on ``cloud``.

    Returns ``(euclidean_estimate, graph_estimate)``; an entry is ``None`` when
    its metric was not requested. The kNN graph is built once over every point
    drawn by the split plans and shared by all scales.
    """
    config = EstimatorConfig() if config is None else config
    cloud = check_cloud(cloud, "cloud")
    kinds = _metric_kinds(config.metric)
    plans = _plans(cloud.shape[0], config)

    graph = None
    meta = {"seed": config.seed, "n_total": int(cloud.shape[0]), "ot": config.ot,
            "disjoint_scales": plans[0].disjoint_scales, "repetitions": config.repetitions}
    if GRAPH_GEODESIC in kinds:
        pool = np.unique(np.concatenate([p.pool() for p in plans]))
        position = np.full(cloud.shape[0], -1, dtype=np.int64)
        position[pool] = np.arange(pool.size)
        graph, k_used = connected_knn_graph(cloud[pool], config.knn)
        if not graph.is_connected():
            raise EstimationError("pooled kNN graph is disconnected even at k = n - 1")
        meta.update(n_pool=int(pool.size), knn_used=int(k_used))

    logs = {kind: {k: [] for k in config.scales} for kind in kinds}
    results = {kind: {k: [] for k in config.scales} for kind in kinds}
    for plan in plans:
        for k in config.scales:
            idx_a, idx_b = plan.pairs[k]
            costs = {}
            if EUCLIDEAN in kinds:
                costs[EUCLIDEAN] = euclidean(cloud[idx_a], cloud[idx_b])
            if GRAPH_GEODESIC in kinds:
                rows = geodesic_rows(graph, position[idx_a])
                costs[GRAPH_GEODESIC] = rows[:, position[idx_b]]
            for kind, cost in costs.items():
                try:
                    res = compute_w1(cost, config.ot, reg=config.reg, max_iters=config.max_iters, tol=config.tol)
                except ValueError as exc:
                    raise EstimationError(f"{kind} W1 failed at scale k={k}: {exc}") from exc
                if not res.w1 > 0:
                    raise EstimationError(f"{kind} W1 is {res.w1} at scale k={k}; cannot take its log")
                logs[kind][k].append(math.log2(res.w1))
                results[kind][k].append(res)

    out = []
    for kind in (EUCLIDEAN, GRAPH_GEODESIC):
        if kind not in kinds:
            out.append(None)
            continue
        entries = [
            ScaleEntry(k, 2.0 ** float(np.mean(logs[kind][k])), results[kind][k]) for k in config.scales
        ]
        try:
            est = slope_estimate(ScaleSeries(entries), metric_kind=kind)
        except NonDecreasingDecayError as exc:
            raise EstimationError(f"{kind}: {exc}") from exc
        est.metadata.update(meta)
        est.metadata["transport"] = {
            int(k): [r.to_dict() for r in results[kind][k]] for k in config.scales
        }
        out.append(est)
    return tuple(out)
