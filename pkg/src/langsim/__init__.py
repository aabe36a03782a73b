"""Acoustic language-similarity analysis over speech embeddings.

Quantifies how close a query language sits to a catalog of reference
languages in a shared embedding space: classifier confusion rates,
centroid cosine similarity, and Frechet distance between Gaussian fits,
plus t-SNE export and the audio-curation pipeline that prepares raw
recordings for embedding extraction.
"""

from .audio import AudioClip, CurationConfig, concatenate_to_target, curate_directory, parse_wav, resample, trim_silence
from .classify import ConfusionProfile, SimilarityReport, confusion_profile, predict_labels, top_k
from .errors import LangsimError
from .metrics import SimilarityScore, cosine_similarity, cosine_score, fid, fid_matched, matched_subsample
from .stats import LanguageStats, centroid, covariance, regularize, sqrt_psd, stats_for
from .store import (
    EmbeddingSet,
    LanguageManifest,
    ManifestEntry,
    ProbabilityMatrix,
    import_csv,
    load_embeddings,
    load_manifest,
    load_probability_matrix,
    save_embeddings,
    save_manifest,
)
from .synth import ClusterSpec, analytic_fid, build_catalog, sample_cluster
from .tsne import Projection2D, ProjectionConfig, pairwise_affinities, tsne

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "ClusterSpec",
    "ConfusionProfile",
    "CurationConfig",
    "EmbeddingSet",
    "LangsimError",
    "LanguageManifest",
    "LanguageStats",
    "ManifestEntry",
    "ProbabilityMatrix",
    "Projection2D",
    "ProjectionConfig",
    "SimilarityReport",
    "SimilarityScore",
    "analytic_fid",
    "build_catalog",
    "centroid",
    "concatenate_to_target",
    "confusion_profile",
    "cosine_score",
    "cosine_similarity",
    "covariance",
    "curate_directory",
    "fid",
    "fid_matched",
    "import_csv",
    "load_embeddings",
    "load_manifest",
    "load_probability_matrix",
    "matched_subsample",
    "pairwise_affinities",
    "parse_wav",
    "predict_labels",
    "regularize",
    "resample",
    "sample_cluster",
    "save_embeddings",
    "save_manifest",
    "sqrt_psd",
    "stats_for",
    "top_k",
    "trim_silence",
    "tsne",
    "__version__",
]
