"""On-disk formats for embedding sets, language manifests, and probability matrices.

The canonical embedding store is a small binary format (magic ``EMB1``,
little-endian header, float32 payload) chosen over text because 256-dim
float payloads are large and lossy in CSV; CSV is supported as an import
path only. All loaded objects are immutable and validated on
construction, so a successfully loaded value always satisfies its
invariants.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CellParseError,
    DimensionMismatchError,
    DuplicateLanguageError,
    MalformedHeaderError,
    ManifestFormatError,
    MissingLanguageFileError,
    NonFiniteValueError,
    ProbabilityRangeError,
    RaggedRowsError,
    RowSumError,
    StoreError,
)

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")

#: Language code used when a set is loaded outside any manifest.
UNDETERMINED = "und"

ROW_SUM_TOLERANCE = 1e-4


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """All embedding vectors of one language, as an N x dim float32 matrix."""

    language: str
    vectors: np.ndarray

    def __post_init__(self) -> None:
        if not self.language:
            raise StoreError("language code must be non-empty")
        vecs = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if vecs.ndim != 2 or vecs.shape[0] < 1 or vecs.shape[1] < 1:
            raise DimensionMismatchError(
                f"vectors must be a non-empty 2-D matrix, got shape {np.shape(self.vectors)}"
            )
        finite = np.isfinite(vecs)
        if not finite.all():
            row, col = np.argwhere(~finite)[0]
            raise NonFiniteValueError(int(row), int(col), context=f"{self.language!r} embeddings")
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    language: str
    path: str
    count: int | None = None


@dataclass(frozen=True)
class LanguageManifest:
    """Catalog of languages with their embedding files and the query language.

    ``root`` is the directory entry paths are relative to (the manifest's
    own directory once loaded from disk).
    """

    query_language: str
    entries: tuple[ManifestEntry, ...]
    root: Path | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        for entry in self.entries:
            if not entry.language:
                raise ManifestFormatError("manifest contains an empty language code")
            if entry.language in seen:
                raise DuplicateLanguageError(entry.language)
            seen.add(entry.language)
        if self.query_language not in seen:
            raise ManifestFormatError(
                f"query language {self.query_language!r} has no manifest entry"
            )

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(entry.language for entry in self.entries)

    @property
    def target_languages(self) -> tuple[str, ...]:
        return tuple(e.language for e in self.entries if e.language != self.query_language)

    def entry_for(self, code: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.language == code:
                return entry
        raise MissingLanguageFileError(code, "<not in manifest>")

    def resolve(self, entry: ManifestEntry) -> Path:
        base = self.root if self.root is not None else Path(".")
        return base / entry.path

    def load_set(self, code: str) -> EmbeddingSet:
        entry = self.entry_for(code)
        path = self.resolve(entry)
        if not path.is_file():
            raise MissingLanguageFileError(code, str(path))
        return load_embeddings(path, language=code)


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Per-utterance classifier probabilities over a fixed language vocabulary."""

    vocabulary: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        vocab = tuple(self.vocabulary)
        if len(vocab) < 2:
            raise StoreError(f"vocabulary needs at least 2 languages, got {len(vocab)}")
        seen: set[str] = set()
        for code in vocab:
            if not code:
                raise StoreError("vocabulary contains an empty language code")
            if code in seen:
                raise DuplicateLanguageError(code)
            seen.add(code)
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(vocab):
            raise DimensionMismatchError(
                f"probability rows must be N x {len(vocab)}, got shape {np.shape(self.rows)}"
            )
        bad = (rows < 0.0) | (rows > 1.0) | ~np.isfinite(rows)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ProbabilityRangeError(int(r), int(c), float(rows[r, c]))
        sums = rows.sum(axis=1)
        off = np.abs(sums - 1.0) > ROW_SUM_TOLERANCE
        if off.any():
            r = int(np.argmax(off))
            raise RowSumError(r, float(sums[r]))
        rows.flags.writeable = False
        object.__setattr__(self, "vocabulary", vocab)
        object.__setattr__(self, "rows", rows)

    @property
    def count(self) -> int:
        return self.rows.shape[0]


# ---------------------------------------------------------------------------
# Binary embedding format


def _pack_matrix(matrix: np.ndarray) -> bytes:
    rows, cols = matrix.shape
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    return _HEADER.pack(MAGIC, cols, rows) + payload


def _unpack_matrix(data: bytes, offset: int, what: str) -> tuple[np.ndarray, int]:
    if len(data) - offset < _HEADER.size:
        raise MalformedHeaderError(f"{what}: file too short for header")
    magic, dim, count = _HEADER.unpack_from(data, offset)
    if magic != MAGIC:
        raise MalformedHeaderError(f"{what}: bad magic {magic!r}, expected {MAGIC!r}")
    if dim < 1 or count < 1:
        raise MalformedHeaderError(f"{what}: header declares {count} x {dim} matrix")
    start = offset + _HEADER.size
    end = start + 4 * dim * count
    if len(data) < end:
        raise DimensionMismatchError(
            f"{what}: payload has {len(data) - start} bytes, header requires {4 * dim * count}"
        )
    values = np.frombuffer(data[start:end], dtype="<f4").reshape(count, dim)
    return values, end


def save_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write ``emb`` in the binary embedding format (bit-exact round trip)."""
    Path(path).write_bytes(_pack_matrix(emb.vectors))


def load_embeddings(path: str | Path, language: str = UNDETERMINED) -> EmbeddingSet:
    """Load a binary embedding file.

    The format does not carry a language code; pass one from the manifest
    or accept the ``und`` placeholder.
    """
    data = Path(path).read_bytes()
    vectors, end = _unpack_matrix(data, 0, str(path))
    if end != len(data):
        raise DimensionMismatchError(
            f"{path}: {len(data) - end} trailing bytes after declared payload"
        )
    finite = np.isfinite(vectors)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise NonFiniteValueError(int(row), int(col), context=str(path))
    return EmbeddingSet(language=language, vectors=vectors)


def peek_embedding_header(path: str | Path) -> tuple[int, int]:
    """Read (dim, count) from an embedding file header without the payload."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise MalformedHeaderError(f"{path}: file too short for header")
    magic, dim, count = _HEADER.unpack(head)
    if magic != MAGIC or dim < 1 or count < 1:
        raise MalformedHeaderError(f"{path}: invalid header")
    return dim, count


# ---------------------------------------------------------------------------
# CSV import


def import_csv(path: str | Path, language: str) -> EmbeddingSet:
    """Import embeddings from a headerless CSV of finite reals."""
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r, record in enumerate(csv.reader(fh)):
            if not record:
                continue
            if rows and len(record) != len(rows[0]):
                raise RaggedRowsError(len(rows), expected=len(rows[0]), got=len(record))
            parsed: list[float] = []
            for c, cell in enumerate(record):
                try:
                    value = float(cell)
                except ValueError:
                    raise CellParseError(len(rows), c, cell) from None
                if not math.isfinite(value):
                    raise CellParseError(len(rows), c, cell)
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise StoreError(f"{path}: CSV has no data rows")
    return EmbeddingSet(language=language, vectors=np.array(rows, dtype=np.float32))


def load_probability_matrix(path: str | Path) -> ProbabilityMatrix:
    """Load a probability CSV: header row of language codes, then probability rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StoreError(f"{path}: empty file") from None
        vocabulary = tuple(code.strip() for code in header)
        data: list[list[float]] = []
        for record in reader:
            if not record:
                continue
            if len(record) != len(vocabulary):
                raise RaggedRowsError(len(data), expected=len(vocabulary), got=len(record))
            parsed = []
            for c, cell in enumerate(record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CellParseError(len(data), c, cell) from None
            data.append(parsed)
    rows = np.array(data, dtype=np.float64) if data else np.empty((0, len(vocabulary)))
    return ProbabilityMatrix(vocabulary=vocabulary, rows=rows)


# ---------------------------------------------------------------------------
# Manifest


def load_manifest(path: str | Path) -> LanguageManifest:
    """Parse a language manifest.

    Line format: first line ``#query <code>``, then one ``<code>\\t<path>``
    entry per line. Utterance counts are filled from embedding file
    headers when the referenced files exist.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#query "):
        raise ManifestFormatError(f"{path}: first line must be '#query <language-code>'")
    query = lines[0][len("#query ") :].strip()
    if not query:
        raise ManifestFormatError(f"{path}: empty query language code")
    root = path.parent
    entries: list[ManifestEntry] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ManifestFormatError(
                f"{path}:{lineno}: expected '<language-code>\\t<relative-path>'"
            )
        code, rel = parts[0].strip(), parts[1].strip()
        count = None
        candidate = root / rel
        if candidate.is_file():
            _, count = peek_embedding_header(candidate)
        entries.append(ManifestEntry(language=code, path=rel, count=count))
    return LanguageManifest(query_language=query, entries=tuple(entries), root=root)


def save_manifest(manifest: LanguageManifest, path: str | Path) -> None:
    """Write a manifest as UTF-8 text with LF line endings."""
    lines = [f"#query {manifest.query_language}"]
    lines.extend(f"{e.language}\t{e.path}" for e in manifest.entries)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
