"""Exception types raised across the package.

Every input violation maps to a distinct class so callers can react to
the failure kind rather than parse messages.
"""

from __future__ import annotations


class LangsimError(Exception):
    """Base class for all errors raised by langsim."""


# ---------------------------------------------------------------------------
# Embedding / probability / manifest storage


class StoreError(LangsimError):
    """A stored artifact (embedding file, CSV, manifest) is invalid."""


class MalformedHeaderError(StoreError):
    """Embedding file does not start with a valid header."""


class DimensionMismatchError(StoreError):
    """Shapes disagree: payload length vs header, or operand dims differ."""


class NonFiniteValueError(StoreError):
    """A NaN or infinity was found where finite values are required."""

    def __init__(self, row: int, col: int, context: str = "") -> None:
        self.row = row
        self.col = col
        where = f" in {context}" if context else ""
        super().__init__(f"non-finite value at row {row}, col {col}{where}")


class RaggedRowsError(StoreError):
    """CSV rows do not all have the same number of columns."""

    def __init__(self, row: int, expected: int, got: int) -> None:
        self.row = row
        super().__init__(f"row {row} has {got} columns, expected {expected}")


class CellParseError(StoreError):
    """A CSV cell could not be parsed as a finite real."""

    def __init__(self, row: int, col: int, text: str) -> None:
        self.row = row
        self.col = col
        super().__init__(f"cannot parse {text!r} at row {row}, col {col}")


class RowSumError(StoreError):
    """A probability row does not sum to 1 within tolerance."""

    def __init__(self, row: int, total: float) -> None:
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total!r}, expected 1 within 1e-4")


class ProbabilityRangeError(StoreError):
    """A probability entry lies outside [0, 1]."""

    def __init__(self, row: int, col: int, value: float) -> None:
        self.row = row
        self.col = col
        super().__init__(f"probability {value!r} at row {row}, col {col} outside [0, 1]")


class DuplicateLanguageError(StoreError):
    """A language code appears more than once where codes must be unique."""

    def __init__(self, code: str) -> None:
        self.code = code
        super().__init__(f"duplicate language code {code!r}")


class ManifestFormatError(StoreError):
    """A language manifest file violates its line format."""


class MissingLanguageFileError(StoreError):
    """A manifest entry references an embedding file that cannot be read."""

    def __init__(self, code: str, path: str) -> None:
        self.code = code
        self.path = path
        super().__init__(f"embedding file for {code!r} not found: {path}")


# ---------------------------------------------------------------------------
# Statistics and similarity metrics


class InsufficientSamplesError(LangsimError):
    """Too few samples for the requested statistic."""


class NotSymmetricError(LangsimError):
    """A matrix expected to be symmetric is not, beyond tolerance."""


class ZeroVectorError(LangsimError):
    """Cosine similarity received a zero-norm vector."""

    def __init__(self, argument: str) -> None:
        self.argument = argument
        super().__init__(f"argument {argument!r} has zero norm")


class NumericalError(LangsimError):
    """A computation produced a value outside its mathematically valid range."""


class SubsampleRangeError(LangsimError):
    """Requested subsample size is outside [2, N]."""

    def __init__(self, n: int, available: int) -> None:
        self.n = n
        self.available = available
        super().__init__(f"subsample size {n} outside [2, {available}]")


class NotPsdError(LangsimError):
    """A covariance specification is not positive semidefinite."""


class OutliersPresentError(LangsimError):
    """Closed-form distance requested for a spec with outlier contamination."""


# ---------------------------------------------------------------------------
# Projection


class BandwidthSearchError(LangsimError):
    """Per-point bandwidth bisection failed to meet the perplexity target."""

    def __init__(self, point: int, entropy_gap: float) -> None:
        self.point = point
        super().__init__(
            f"bandwidth search failed for point {point} (entropy gap {entropy_gap:.3e})"
        )


class ConfigError(LangsimError):
    """A configuration value violates its declared bounds."""


# ---------------------------------------------------------------------------
# Audio


class WavError(LangsimError):
    """Base class for WAV container problems."""


class MalformedContainerError(WavError):
    """Input is not a well-formed RIFF/WAVE container."""


class UnsupportedEncodingError(WavError):
    """WAV codec is neither 16-bit PCM nor 32-bit IEEE float."""

    def __init__(self, codec: int, detail: str = "") -> None:
        self.codec = codec
        extra = f" ({detail})" if detail else ""
        super().__init__(f"unsupported WAV encoding: codec id {codec}{extra}")


class MissingDataChunkError(WavError):
    """WAV container has no data chunk."""


class SampleRateMismatchError(LangsimError):
    """Clips being combined do not share the expected sample rate."""
