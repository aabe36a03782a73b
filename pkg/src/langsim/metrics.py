"""Fine-grained similarity between a query language and a target language.

Two measures over the shared embedding space:

* cosine similarity between language centroids (higher = more similar),
* Frechet distance between Gaussian fits of the embedding clouds
  (lower = more similar), with matched-count subsampling so both sides
  contribute the same number of utterances.

The Frechet trace term uses the symmetric-product formulation
``Tr((A B)^(1/2)) = Tr(sqrt_psd(sqrt_psd(A) B sqrt_psd(A)))``, valid
because ``A B`` is similar to that symmetric PSD product; it avoids the
complex eigenvalues that round-off induces in the plain product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    NumericalError,
    SubsampleRangeError,
    ZeroVectorError,
)
from .rng import subsample_indices
from .stats import LanguageStats, sqrt_psd, stats_for
from .store import EmbeddingSet

#: Ranking direction per metric: cosine ranks best-first descending,
#: Frechet distance ascending.
METRIC_DIRECTIONS = {"cosine": "descending", "fid": "ascending"}

FID_CLAMP_SCALE = 1e-6


@dataclass(frozen=True)
class SimilarityScore:
    """One query-vs-target measurement with its sampling provenance."""

    query: str
    target: str
    metric: str
    value: float
    sample_count_query: int
    sample_count_target: int
    seed: int | None = None


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise DimensionMismatchError(f"vector dims differ: {a.size} vs {b.size}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0:
        raise ZeroVectorError("a")
    if norm_b == 0.0:
        raise ZeroVectorError("b")
    value = float(a @ b) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def fid(stats_q: LanguageStats, stats_t: LanguageStats) -> float:
    """Frechet distance between two Gaussian fits.

    ``||mu_q - mu_t||^2 + Tr(S_q + S_t - 2 (S_q S_t)^(1/2))``. Small
    negative results (round-off) are clamped to zero; negatives beyond
    ``1e-6 * max(1, Tr S_q + Tr S_t)`` raise :class:`NumericalError`.
    """
    if stats_q.dim != stats_t.dim:
        raise DimensionMismatchError(
            f"stats dims differ: {stats_q.dim} ({stats_q.language!r}) vs "
            f"{stats_t.dim} ({stats_t.language!r})"
        )
    delta = stats_q.mean - stats_t.mean
    mean_term = float(delta @ delta)
    root_q = sqrt_psd(stats_q.covariance)
    inner = root_q @ stats_t.covariance @ root_q
    cross_trace = float(np.trace(sqrt_psd(0.5 * (inner + inner.T))))
    trace_q = float(np.trace(stats_q.covariance))
    trace_t = float(np.trace(stats_t.covariance))
    value = mean_term + trace_q + trace_t - 2.0 * cross_trace
    if value < 0.0:
        tolerance = FID_CLAMP_SCALE * max(1.0, trace_q + trace_t)
        if value < -tolerance:
            raise NumericalError(
                f"fid produced {value!r}, below the round-off tolerance {-tolerance:.3e}"
            )
        value = 0.0
    return value


def matched_subsample(emb: EmbeddingSet, n: int, seed: int) -> EmbeddingSet:
    """Draw ``n`` rows without replacement, deterministically in (seed, N, n)."""
    if not 2 <= n <= emb.count:
        raise SubsampleRangeError(n, emb.count)
    idx = subsample_indices(emb.count, n, seed)
    return EmbeddingSet(language=emb.language, vectors=emb.vectors[idx])


def fid_matched(query: EmbeddingSet, target: EmbeddingSet, seed: int = 0) -> SimilarityScore:
    """Frechet distance with the larger side subsampled to the smaller count.

    The larger set is reduced, never the smaller upsampled: replicating
    rows would bias the covariance rank. ``seed`` is recorded on the
    score only when subsampling actually happened.
    """
    for emb in (query, target):
        if emb.count < 2:
            raise InsufficientSamplesError(
                f"fid needs N >= 2 on both sides, got N={emb.count} for {emb.language!r}"
            )
    n = min(query.count, target.count)
    subsampled = query.count != target.count
    q = matched_subsample(query, n, seed) if query.count > n else query
    t = matched_subsample(target, n, seed) if target.count > n else target
    value = fid(stats_for(q), stats_for(t))
    return SimilarityScore(
        query=query.language,
        target=target.language,
        metric="fid",
        value=value,
        sample_count_query=n,
        sample_count_target=n,
        seed=seed if subsampled else None,
    )


def cosine_score(query: EmbeddingSet, target: EmbeddingSet) -> SimilarityScore:
    """Cosine similarity between the two sets' empirical centroids."""
    value = cosine_similarity(
        query.vectors.astype(np.float64).mean(axis=0),
        target.vectors.astype(np.float64).mean(axis=0),
    )
    return SimilarityScore(
        query=query.language,
        target=target.language,
        metric="cosine",
        value=value,
        sample_count_query=query.count,
        sample_count_target=target.count,
        seed=None,
    )
