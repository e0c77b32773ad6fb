"""Seeded generators for synthetic point clouds.

Point clouds are plain ``(n, D)`` float64 arrays. Every generator is a pure
function of its arguments and ``seed``; see :mod:`wassdim._utils` for how
seeds are split into per-operation streams.
"""
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from ._utils import (
    STREAM_BALL,
    STREAM_EMBEDDING,
    STREAM_SPHERE,
    STREAM_SWISS_ROLL,
    check_cloud,
    check_positive_int,
    make_rng,
)

__all__ = [
    "EmbeddingSpec",
    "monomial_features",
    "embedding_matrix",
    "polynomial_embed",
    "sample_ball",
    "sample_sphere",
    "swiss_roll",
]

LINEAR_BLOCKS = ("random", "identity", "orthogonal")


def sample_sphere(d, n, seed=None):
    """Draw ``n`` points uniformly from the unit sphere S^d in R^(d+1).

    Gaussian vectors are normalized, which gives the rotation-invariant
    (uniform) law on the sphere.
    """
    d = check_positive_int(d, "d")
    n = check_positive_int(n, "n")
    rng = make_rng(seed, STREAM_SPHERE)
    x = rng.standard_normal((n, d + 1))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    # A zero Gaussian draw has probability zero; redraw defensively.
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        x[bad] = rng.standard_normal((int(bad.sum()), d + 1))
        norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / norms


def sample_ball(d, n, radius=1.0, seed=None):
    """Draw ``n`` points uniformly from the d-ball of the given radius.

    Direction is a normalized Gaussian and the norm is ``radius * U**(1/d)``,
    the inverse CDF of ``P(|X| <= r) = (r / radius)**d``.
    """
    d = check_positive_int(d, "d")
    n = check_positive_int(n, "n")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = make_rng(seed, STREAM_BALL)
    direction = rng.standard_normal((n, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        direction[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return direction / norms * r[:, None]


def swiss_roll(n, seed=None):
    """Isomap Swiss roll: ``(t cos t, h, t sin t)``.

    ``t`` is uniform on [1.5*pi, 4.5*pi] and ``h`` uniform on [0, 21].
    """
    n = check_positive_int(n, "n")
    rng = make_rng(seed, STREAM_SWISS_ROLL)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    h = 21.0 * rng.random(n)
    return np.column_stack([t * np.cos(t), h, t * np.sin(t)])


@dataclass(frozen=True)
class EmbeddingSpec:
    """Parameters of a random polynomial immersion R^(source_dim+1) -> R^target_dim.

    ``source_dim`` is the intrinsic dimension d of the sphere being embedded,
    so the input cloud lives in R^(d+1). ``linear_block`` selects how the
    degree-1 coefficients are drawn: ``"random"`` (Gaussian, rows of the
    whole matrix normalized), ``"identity"`` (input padded with zeros) or
    ``"orthogonal"`` (random orthonormal columns).
    """

    source_dim: int
    target_dim: int
    degree: int = 3
    seed: int = 0
    linear_block: str = "random"

    def __post_init__(self):
        check_positive_int(self.source_dim, "source_dim")
        check_positive_int(self.degree, "degree")
        if self.target_dim < self.source_dim + 1:
            raise ValueError(
                f"target_dim must be >= source_dim + 1 = {self.source_dim + 1}, got {self.target_dim}"
            )
        if self.linear_block not in LINEAR_BLOCKS:
            raise ValueError(f"linear_block must be one of {LINEAR_BLOCKS}, got {self.linear_block!r}")

    @property
    def input_dim(self):
        return self.source_dim + 1


def _monomial_index_sets(m, degree):
    return [c for p in range(1, degree + 1) for c in combinations_with_replacement(range(m), p)]


def monomial_features(x, degree):
    """Stack every monomial of total degree 1..degree, lowest degree first.

    The first ``D`` columns are the coordinates themselves.
    """
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for idx in _monomial_index_sets(x.shape[1], degree):
        cols.append(np.prod(x[:, list(idx)], axis=1))
    return np.column_stack(cols)


def embedding_matrix(spec):
    """The coefficient matrix ``A`` (target_dim x n_features) of the embedding."""
    m = spec.input_dim
    n_features = len(_monomial_index_sets(m, spec.degree))
    rng = make_rng(spec.seed, STREAM_EMBEDDING)
    D = spec.target_dim
    if spec.linear_block == "random":
        a = rng.standard_normal((D, n_features))
        # Gaussian D x m block with D >= m has full column rank almost surely;
        # redraw in the measure-zero failure case.
        while np.linalg.matrix_rank(a[:, :m]) < m:
            a[:, :m] = rng.standard_normal((D, m))
        return a / np.linalg.norm(a, axis=1, keepdims=True)

    a = np.zeros((D, n_features))
    if spec.linear_block == "identity":
        a[:m, :m] = np.eye(m)
    else:
        q, r = np.linalg.qr(rng.standard_normal((D, m)))
        a[:, :m] = q * np.sign(np.diag(r))
    if n_features > m:
        nonlinear = rng.standard_normal((D, n_features - m))
        a[:, m:] = nonlinear / np.linalg.norm(nonlinear, axis=1, keepdims=True)
    return a


def polynomial_embed(cloud, spec):
    """Map each point ``x`` to ``A @ phi(x)`` with ``phi`` the monomial features."""
    cloud = check_cloud(cloud, "cloud")
    if cloud.shape[1] != spec.input_dim:
        raise ValueError(
            f"cloud has dimension {cloud.shape[1]} but spec expects source_dim + 1 = {spec.input_dim}"
        )
    a = embedding_matrix(spec)
    return monomial_features(cloud, spec.degree) @ a.T
