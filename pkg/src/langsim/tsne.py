"""Exact 2-D t-SNE for pooled multi-language embedding sets.

O(N^2) formulation: Gaussian input affinities with per-point bandwidths
found by bisection against a perplexity target, Student-t (one degree of
freedom) output affinities, and plain gradient descent with momentum and
early exaggeration. Desk-scale point counts do not justify tree
approximations, and the simple optimizer is directly verifiable against
finite differences.

Everything is deterministic given the config seed: initialization comes
from the package's portable RNG and the loop is free of data races.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .errors import BandwidthSearchError, ConfigError, DimensionMismatchError, NumericalError
from .rng import Stream
from .store import EmbeddingSet

#: Iterations during which early exaggeration and the lower momentum apply.
EXPLORATION_ITERS = 250

ENTROPY_TOLERANCE = 1e-5
MAX_BISECTION_STEPS = 50
INIT_STDDEV = 1e-4


@dataclass(frozen=True)
class ProjectionConfig:
    """t-SNE hyperparameters; defaults follow the standard formulation."""

    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    learning_rate: float = 200.0
    momentum: tuple[float, float] = (0.5, 0.8)
    seed: int = 0

    def validate(self, n_points: int) -> None:
        if self.perplexity <= 0:
            raise ConfigError(f"perplexity must be positive, got {self.perplexity}")
        if self.perplexity >= (n_points - 1) / 3:
            raise ConfigError(
                f"perplexity {self.perplexity} out of range: must be below "
                f"(N-1)/3 = {(n_points - 1) / 3:.2f} for N={n_points}"
            )
        if self.iterations < EXPLORATION_ITERS:
            raise ConfigError(f"iterations must be >= {EXPLORATION_ITERS}, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True, eq=False)
class Projection2D:
    """2-D layout with per-point language labels and the achieved KL value."""

    points: np.ndarray
    labels: tuple[str, ...]
    final_kl: float
    config: ProjectionConfig

    def __post_init__(self) -> None:
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise DimensionMismatchError(f"points must be N x 2, got {points.shape}")
        if not np.isfinite(points).all():
            raise NumericalError("projection produced non-finite coordinates")
        if len(self.labels) != points.shape[0]:
            raise DimensionMismatchError(
                f"{len(self.labels)} labels for {points.shape[0]} points"
            )
        if self.final_kl < 0:
            raise NumericalError(f"final KL must be >= 0, got {self.final_kl}")
        points.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", tuple(self.labels))


def _squared_distances(x: np.ndarray) -> np.ndarray:
    norms = np.einsum("ij,ij->i", x, x)
    d2 = norms[:, None] + norms[None, :] - 2.0 * (x @ x.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _row_affinities(shifted: np.ndarray, target_entropy: float) -> tuple[np.ndarray, float, bool]:
    """Bisect the Gaussian precision of one row to hit ``target_entropy``.

    ``shifted`` holds the row's off-diagonal squared distances minus their
    minimum (the conditional distribution is shift-invariant, and the
    shift keeps ``exp`` from underflowing the whole row). Returns the
    probabilities, the entropy gap, and whether the search bracketed the
    target; an unbracketed search means the target entropy is outside the
    row's achievable range and the saturated limit distribution is the
    answer (e.g. ties at the minimum distance).
    """
    beta = 1.0
    lower: float | None = None
    upper: float | None = None
    probs = np.full(shifted.shape, 1.0 / shifted.size)
    gap = math.inf
    for _ in range(MAX_BISECTION_STEPS):
        weights = np.exp(-beta * shifted)
        total = float(weights.sum())
        probs = weights / total
        entropy = math.log(total) + beta * float(shifted @ probs)
        gap = entropy - target_entropy
        if abs(gap) <= ENTROPY_TOLERANCE:
            return probs, gap, True
        if gap > 0:
            lower = beta
            beta = beta * 2.0 if upper is None else 0.5 * (beta + upper)
        else:
            upper = beta
            beta = beta * 0.5 if lower is None else 0.5 * (beta + lower)
    bracketed = lower is not None and upper is not None
    return probs, gap, not bracketed


def pairwise_affinities(vectors: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized t-SNE input affinities ``P`` for an N x dim matrix.

    Each row's conditional entropy is matched to ``log(perplexity)``
    within 1e-5 wherever that entropy is achievable; rows whose distance
    ties make the target unreachable take their limiting distribution.
    ``P`` is symmetric, non-negative, zero on the diagonal, and sums to 1.
    """
    x = np.ascontiguousarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError(f"vectors must be 2-D, got shape {x.shape}")
    n = x.shape[0]
    if n < 4:
        raise ConfigError(f"pairwise affinities need at least 4 points, got {n}")
    if not 0.0 < perplexity < n - 1:
        raise ConfigError(
            f"perplexity {perplexity} out of range: must be in (0, N-1) for N={n}"
        )
    target_entropy = math.log(perplexity)
    d2 = _squared_distances(x)
    off_diag = ~np.eye(n, dtype=bool)
    conditional = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        row = d2[i][off_diag[i]]
        shifted = row - row.min()
        probs, gap, ok = _row_affinities(shifted, target_entropy)
        if not ok:
            raise BandwidthSearchError(i, gap)
        conditional[i][off_diag[i]] = probs
    return (conditional + conditional.T) / (2.0 * n)


def _student_t_affinities(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    weights = 1.0 / (1.0 + _squared_distances(y))
    np.fill_diagonal(weights, 0.0)
    q = weights / weights.sum()
    return q, weights


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) of a layout; zero-probability P entries contribute zero."""
    q, _ = _student_t_affinities(y)
    mask = p > 0
    value = float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))
    if value < 0.0:
        if value < -1e-12:
            raise NumericalError(f"KL divergence must be >= 0, got {value!r}")
        value = 0.0
    return value


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P || Q) with respect to the layout points.

    ``grad_i = 4 * sum_j (p_ij - q_ij) * w_ij * (y_i - y_j)`` with
    ``w_ij = 1 / (1 + ||y_i - y_j||^2)``.
    """
    q, weights = _student_t_affinities(y)
    m = (p - q) * weights
    row_sums = m.sum(axis=1)
    return 4.0 * (row_sums[:, None] * y - np.einsum("ij,jk->ik", m, y))


def tsne(pooled: Sequence[EmbeddingSet], config: ProjectionConfig | None = None) -> Projection2D:
    """Project pooled embedding sets to 2-D.

    Labels follow the input order (all rows of the first set, then the
    second, ...). The layout is bit-reproducible for a given config.
    """
    config = config or ProjectionConfig()
    if not pooled:
        raise ConfigError("t-SNE needs at least one embedding set")
    dims = {s.dim for s in pooled}
    if len(dims) != 1:
        raise DimensionMismatchError(f"pooled sets have mixed dims: {sorted(dims)}")
    x = np.vstack([s.vectors.astype(np.float64) for s in pooled])
    labels = tuple(s.language for s in pooled for _ in range(s.count))
    n = x.shape[0]
    if n < 10:
        raise ConfigError(f"t-SNE needs at least 10 points, got {n}")
    config.validate(n)

    p = pairwise_affinities(x, config.perplexity)
    y = Stream(config.seed).normals(2 * n).reshape(n, 2) * INIT_STDDEV
    update = np.zeros_like(y)
    for iteration in range(config.iterations):
        exploring = iteration < EXPLORATION_ITERS
        exaggeration = config.early_exaggeration if exploring else 1.0
        momentum = config.momentum[0] if exploring else config.momentum[1]
        grad = kl_gradient(p * exaggeration, y)
        update = momentum * update - config.learning_rate * grad
        y = y + update
        y = y - y.mean(axis=0)
    return Projection2D(points=y, labels=labels, final_kl=kl_divergence(p, y), config=config)
