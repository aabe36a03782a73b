"""Synthetic embedding catalogs with closed-form similarity ground truth.

Clusters are parameterized Gaussians sampled through the portable RNG
(Box-Muller normals against a Cholesky or eigen factor of the spec
covariance), so a catalog regenerates byte-identically from its seed on
any platform. An optional outlier knob inflates the deviation of a
sample subset, which grows the empirical covariance while leaving the
centroid roughly fixed: exactly the mechanism that makes distributional
distance diverge from centroid direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, DuplicateLanguageError, NotPsdError, OutliersPresentError
from .rng import Stream, derive_seed
from .stats import sqrt_psd
from .store import EmbeddingSet, LanguageManifest, ManifestEntry, save_embeddings, save_manifest


@dataclass(frozen=True, eq=False)
class ClusterSpec:
    """One language's Gaussian parameters plus outlier contamination."""

    language: str
    mean: np.ndarray
    covariance: np.ndarray
    count: int
    outlier_fraction: float = 0.0
    outlier_scale: float = 1.0

    def __post_init__(self) -> None:
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        if mean.ndim != 1 or mean.size < 1:
            raise DimensionMismatchError(f"mean must be a 1-D vector, got shape {mean.shape}")
        cov = np.asarray(self.covariance, dtype=np.float64)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(mean.size)
        elif cov.ndim == 1:
            if cov.size != mean.size:
                raise DimensionMismatchError(
                    f"diagonal covariance has {cov.size} entries for dim {mean.size}"
                )
            cov = np.diag(cov)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatchError(
                f"covariance shape {cov.shape} does not match dim {mean.size}"
            )
        cov = 0.5 * (cov + cov.T)
        if self.count < 2:
            raise ValueError(f"count must be >= 2, got {self.count}")
        if not 0.0 <= self.outlier_fraction < 0.5:
            raise ValueError(f"outlier fraction must be in [0, 0.5), got {self.outlier_fraction}")
        if self.outlier_scale < 1.0:
            raise ValueError(f"outlier scale must be >= 1, got {self.outlier_scale}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def from_dict(cls, doc: dict) -> "ClusterSpec":
        return cls(
            language=doc["language"],
            mean=np.asarray(doc["mean"], dtype=np.float64),
            covariance=np.asarray(doc["covariance"], dtype=np.float64),
            count=int(doc["count"]),
            outlier_fraction=float(doc.get("outlier_fraction", 0.0)),
            outlier_scale=float(doc.get("outlier_scale", 1.0)),
        )


def _factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular or eigen factor L with L @ L.T = cov."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(cov)
        floor = -1e-10 * max(1.0, float(eigvals[-1]))
        if eigvals[0] < floor:
            raise NotPsdError(
                f"covariance has eigenvalue {eigvals[0]:.3e}, not positive semidefinite"
            ) from None
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_cluster(spec: ClusterSpec, seed: int) -> EmbeddingSet:
    """Draw ``spec.count`` vectors from the spec's Gaussian, deterministically.

    Standard normals fill row-major (sample 0 consumes the first ``dim``
    draws). The first ``floor(outlier_fraction * count)`` samples have
    their deviation from the mean multiplied by ``outlier_scale``.
    """
    factor = _factor(spec.covariance)
    z = Stream(seed).normals(spec.count * spec.dim).reshape(spec.count, spec.dim)
    deviations = z @ factor.T
    n_outliers = int(spec.outlier_fraction * spec.count)
    if n_outliers and spec.outlier_scale != 1.0:
        deviations[:n_outliers] *= spec.outlier_scale
    return EmbeddingSet(language=spec.language, vectors=spec.mean + deviations)


def analytic_fid(spec_a: ClusterSpec, spec_b: ClusterSpec) -> float:
    """Closed-form Frechet distance between two pure Gaussian specs."""
    if spec_a.outlier_fraction or spec_b.outlier_fraction:
        raise OutliersPresentError(
            "closed-form distance holds only for pure Gaussians (outlier_fraction 0)"
        )
    if spec_a.dim != spec_b.dim:
        raise DimensionMismatchError(f"spec dims differ: {spec_a.dim} vs {spec_b.dim}")
    delta = spec_a.mean - spec_b.mean
    root_a = sqrt_psd(spec_a.covariance)
    inner = root_a @ spec_b.covariance @ root_a
    cross = float(np.trace(sqrt_psd(0.5 * (inner + inner.T))))
    value = float(delta @ delta) + float(np.trace(spec_a.covariance)) + float(
        np.trace(spec_b.covariance)
    ) - 2.0 * cross
    return max(0.0, value)


def build_catalog(
    specs: list[ClusterSpec],
    seed: int,
    out_dir: str | Path,
    query: str | None = None,
) -> LanguageManifest:
    """Sample every cluster and write an embedding catalog plus manifest.

    Cluster ``i`` samples from ``derive_seed(seed, i)``, so catalogs are
    reproducible and clusters independent. The query language defaults to
    the first spec.
    """
    if not specs:
        raise ValueError("catalog needs at least one cluster spec")
    codes = [spec.language for spec in specs]
    seen: set[str] = set()
    for code in codes:
        if code in seen:
            raise DuplicateLanguageError(code)
        seen.add(code)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, spec in enumerate(specs):
        emb = sample_cluster(spec, derive_seed(seed, index))
        filename = f"{spec.language}.emb"
        save_embeddings(emb, out_dir / filename)
        entries.append(ManifestEntry(language=spec.language, path=filename, count=spec.count))
    manifest = LanguageManifest(
        query_language=query if query is not None else specs[0].language,
        entries=tuple(entries),
        root=out_dir,
    )
    save_manifest(manifest, out_dir / "manifest.txt")
    return manifest


def load_cluster_specs(path: str | Path) -> tuple[list[ClusterSpec], str | None]:
    """Read a catalog description JSON: ``{"query": ..., "clusters": [...]}``.

    A bare JSON list is accepted as the clusters array with no explicit
    query (the first cluster becomes the query).
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, list):
        clusters, query = doc, None
    else:
        clusters, query = doc.get("clusters", []), doc.get("query")
    specs = [ClusterSpec.from_dict(entry) for entry in clusters]
    return specs, query
