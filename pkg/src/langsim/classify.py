"""Confusion analysis of classifier probabilities, plus top-k ranking.

The query language may be absent from the classifier vocabulary; that is
the expected low-resource setting, where the overall misclassification
rate degenerates to 1 and the per-language confusion rates carry the
signal.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InsufficientSamplesError
from .metrics import SimilarityScore
from .store import ProbabilityMatrix


@dataclass(frozen=True)
class ConfusionProfile:
    """Prediction-rate breakdown for one true label.

    ``per_language`` maps every predicted code with a nonzero rate to its
    rate, including the true label itself when it was ever predicted; the
    rates sum to 1 exactly. ``overall_mr`` is the fraction of rows whose
    argmax prediction differs from the true label.
    """

    true_label: str
    total: int
    overall_mr: float
    per_language: dict[str, float]

    def confusion_rates(self) -> dict[str, float]:
        """Rates of predictions that are *not* the true label."""
        return {code: r for code, r in self.per_language.items() if code != self.true_label}


def predict_labels(probs: ProbabilityMatrix) -> list[str]:
    """Argmax language per row; ties resolve to the lowest vocabulary index."""
    if probs.count == 0:
        return []
    winners = np.argmax(probs.rows, axis=1)
    return [probs.vocabulary[int(i)] for i in winners]


def confusion_profile(probs: ProbabilityMatrix, true_label: str) -> ConfusionProfile:
    """Count argmax predictions and normalize by the number of rows.

    ``true_label`` need not be in the vocabulary; in that case no row can
    match and the overall misclassification rate is exactly 1.
    """
    if probs.count < 1:
        raise InsufficientSamplesError("confusion profile needs at least one row")
    predictions = predict_labels(probs)
    counts = Counter(predictions)
    total = probs.count
    per_language = {code: counts[code] / total for code in sorted(counts)}
    overall_mr = (total - counts.get(true_label, 0)) / total
    return ConfusionProfile(
        true_label=true_label,
        total=total,
        overall_mr=overall_mr,
        per_language=per_language,
    )


# ---------------------------------------------------------------------------
# Ranking


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    language: str
    value: float


@dataclass(frozen=True)
class SimilarityReport:
    """Ranked (language, value) list for one metric, with run metadata."""

    metric: str
    direction: str
    k: int
    entries: tuple[RankedEntry, ...]
    metadata: dict = field(default_factory=dict)


RankSource = Union[ConfusionProfile, Mapping[str, float], Iterable[SimilarityScore]]


def _as_pairs(source: RankSource) -> tuple[list[tuple[str, float]], str]:
    if isinstance(source, ConfusionProfile):
        return list(source.confusion_rates().items()), "confusion_rate"
    if isinstance(source, Mapping):
        return [(str(k), float(v)) for k, v in source.items()], "value"
    scores = list(source)
    pairs = [(s.target, s.value) for s in scores]
    metrics = {s.metric for s in scores}
    return pairs, metrics.pop() if len(metrics) == 1 else "value"


def top_k(
    source: RankSource,
    k: int,
    direction: str,
    metric: str | None = None,
    metadata: dict | None = None,
) -> SimilarityReport:
    """Rank entries by value and keep the first ``min(k, len)``.

    ``direction`` is ``"ascending"`` or ``"descending"``; equal values
    order lexicographically by language code so reports are stable.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if direction not in ("ascending", "descending"):
        raise ValueError(f"direction must be 'ascending' or 'descending', got {direction!r}")
    pairs, inferred = _as_pairs(source)
    reverse = direction == "descending"
    pairs.sort(key=lambda p: ((-p[1] if reverse else p[1]), p[0]))
    chosen = pairs[: min(k, len(pairs))]
    entries = tuple(
        RankedEntry(rank=i + 1, language=code, value=value)
        for i, (code, value) in enumerate(chosen)
    )
    return SimilarityReport(
        metric=metric if metric is not None else inferred,
        direction=direction,
        k=k,
        entries=entries,
        metadata=dict(metadata or {}),
    )
