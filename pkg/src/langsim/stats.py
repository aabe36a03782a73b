"""Per-language distributional statistics.

Centroid, unbiased sample covariance, trace-scaled regularization, and a
symmetric-eigendecomposition matrix square root: the shared numerical
substrate for the centroid-cosine and Frechet-distance metrics. All math
runs in float64 regardless of the float32 storage dtype.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    MalformedHeaderError,
    NotSymmetricError,
)
from .store import UNDETERMINED, EmbeddingSet, _pack_matrix, _unpack_matrix

DEFAULT_EPSILON_SCALE = 1e-6
SYMMETRY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class LanguageStats:
    """Mean vector, covariance matrix, and sample count for one language."""

    language: str
    mean: np.ndarray
    covariance: np.ndarray
    count: int

    def __post_init__(self) -> None:
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        cov = np.ascontiguousarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1:
            raise DimensionMismatchError(f"mean must be 1-D, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatchError(
                f"covariance shape {cov.shape} does not match dim {mean.size}"
            )
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("statistics must be finite")
        _require_symmetric(cov, what=f"{self.language!r} covariance")
        if self.count < 2:
            raise InsufficientSamplesError(
                f"count must be >= 2 when covariance is populated, got {self.count}"
            )
        # Exact symmetrization so downstream eigendecompositions see a
        # bitwise-symmetric matrix.
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


def _require_symmetric(m: np.ndarray, what: str = "matrix") -> None:
    gap = float(np.abs(m - m.T).max()) if m.size else 0.0
    if gap > SYMMETRY_TOLERANCE:
        raise NotSymmetricError(f"{what} asymmetric by {gap:.3e} (tolerance {SYMMETRY_TOLERANCE})")


def centroid(emb: EmbeddingSet) -> np.ndarray:
    """Mean embedding vector of the set, float64."""
    return emb.vectors.astype(np.float64).mean(axis=0)


def covariance(emb: EmbeddingSet) -> np.ndarray:
    """Unbiased sample covariance (divisor N-1) of the set's rows."""
    if emb.count < 2:
        raise InsufficientSamplesError(f"covariance needs N >= 2, got N={emb.count}")
    x = emb.vectors.astype(np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (emb.count - 1)
    return 0.5 * (cov + cov.T)


def regularize(cov: np.ndarray, epsilon_scale: float = DEFAULT_EPSILON_SCALE) -> np.ndarray:
    """Add ``eps * I`` with ``eps = epsilon_scale * trace/dim``.

    Falls back to ``eps = epsilon_scale`` when the trace is zero, so even
    an all-zero covariance becomes strictly PSD.
    """
    cov = np.asarray(cov, dtype=np.float64)
    _require_symmetric(cov, what="covariance")
    dim = cov.shape[0]
    trace = float(np.trace(cov))
    eps = epsilon_scale if trace == 0.0 else epsilon_scale * trace / dim
    return cov + eps * np.eye(dim)


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Negative eigenvalues (round-off leakage) are clamped to zero, which
    also makes this the projection-then-root for nearly-PSD inputs.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got shape {m.shape}")
    _require_symmetric(m)
    sym = 0.5 * (m + m.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    s = (eigvecs * root) @ eigvecs.T
    return 0.5 * (s + s.T)


def stats_for(emb: EmbeddingSet, epsilon_scale: float = DEFAULT_EPSILON_SCALE) -> LanguageStats:
    """Centroid plus regularized covariance for one embedding set."""
    if emb.count < 2:
        raise InsufficientSamplesError(
            f"statistics for {emb.language!r} need N >= 2, got N={emb.count}"
        )
    return LanguageStats(
        language=emb.language,
        mean=centroid(emb),
        covariance=regularize(covariance(emb), epsilon_scale),
        count=emb.count,
    )


# ---------------------------------------------------------------------------
# Optional per-language stats cache
#
# Reuses the embedding binary block format: one 1 x dim block for the
# mean, one dim x dim block for the covariance, then the sample count as
# unsigned 32-bit little-endian. Values are stored in single precision,
# matching the embedding store; regeneration from the same file is
# deterministic.

_COUNT = struct.Struct("<I")


def save_stats(stats: LanguageStats, path: str | Path) -> None:
    blob = (
        _pack_matrix(stats.mean.reshape(1, -1))
        + _pack_matrix(stats.covariance)
        + _COUNT.pack(stats.count)
    )
    Path(path).write_bytes(blob)


def load_stats(path: str | Path, language: str = UNDETERMINED) -> LanguageStats:
    data = Path(path).read_bytes()
    mean_block, offset = _unpack_matrix(data, 0, f"{path} (mean block)")
    cov_block, offset = _unpack_matrix(data, offset, f"{path} (covariance block)")
    if len(data) - offset != _COUNT.size:
        raise MalformedHeaderError(f"{path}: expected a trailing 4-byte count")
    (count,) = _COUNT.unpack_from(data, offset)
    if mean_block.shape[0] != 1 or cov_block.shape != (mean_block.shape[1],) * 2:
        raise DimensionMismatchError(
            f"{path}: mean block {mean_block.shape} and covariance block "
            f"{cov_block.shape} are inconsistent"
        )
    return LanguageStats(
        language=language,
        mean=mean_block[0].astype(np.float64),
        covariance=cov_block.astype(np.float64),
        count=int(count),
    )
