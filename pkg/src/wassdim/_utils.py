"""Shared helpers: seeded random streams, input checks and chunked distances."""
import numpy as np
from scipy.spatial.distance import cdist

# Stream ids for seeded operations. Each operation draws from
# PCG64(SeedSequence(seed, spawn_key=(stream,))), so two operations given the
# same user seed never share random numbers.
STREAM_SPHERE = 1
STREAM_BALL = 2
STREAM_SWISS_ROLL = 3
STREAM_EMBEDDING = 4
STREAM_SPLIT = 5
STREAM_EXPERIMENT = 6

CHUNK_ROWS = 1024


def make_rng(seed, stream, *substream):
    """Return the generator for ``(seed, stream, *substream)``."""
    if seed is None:
        return np.random.default_rng()
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    key = (stream,) + tuple(int(s) for s in substream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def check_cloud(points, name="points", allow_empty=False):
    """Validate a point cloud and return it as a C-contiguous float64 (n, D) array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array of shape (n, D), got ndim={arr.ndim}")
    if arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one coordinate")
    if arr.shape[0] < 1 and not allow_empty:
        raise ValueError(f"{name} must contain at least one point")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(arr)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def euclidean(a, b):
    """Exact pairwise Euclidean distances.

    Uses per-pair sums of squared differences, so zero-padding both clouds
    with extra coordinates leaves every distance bit-identical.
    """
    return cdist(a, b, metric="euclidean")


def iter_distance_blocks(points, other=None, chunk=CHUNK_ROWS):
    """Yield ``(start, block)`` with ``block = euclidean(points[start:start+chunk], other)``."""
    other = points if other is None else other
    for start in range(0, points.shape[0], chunk):
        yield start, euclidean(points[start:start + chunk], other)
