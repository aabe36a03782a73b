"""Raw-recording curation: decode, resample, trim, and pack utterances.

The pipeline turns a directory of WAV files into mono 16 kHz clips of
roughly uniform duration: parse PCM16/float32 RIFF containers, resample
with a Kaiser-windowed sinc filter, gate leading/trailing silence on
frame RMS, and greedily concatenate short clips in source order until
each output lands in the configured duration band. Every automated
choice is recorded in a JSON manifest so the curation is auditable.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    MalformedContainerError,
    MissingDataChunkError,
    SampleRateMismatchError,
    UnsupportedEncodingError,
)

_WAVE_PCM = 0x0001
_WAVE_FLOAT = 0x0003
_WAVE_EXTENSIBLE = 0xFFFE

#: Kaiser shape parameter: ~90 dB stopband, passband ripple well under 1%.
KAISER_BETA = 8.6
#: Half-width of the sinc kernel in samples at the lower of the two rates.
KERNEL_HALF_WIDTH = 64

_INT16_SCALE = 32768.0


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono amplitude buffer in [-1, 1] with its sample rate and origin."""

    samples: np.ndarray
    sample_rate: int
    source: str = ""

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ConfigError(f"sample rate must be positive, got {self.sample_rate}")
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ConfigError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise ConfigError("samples must be finite")
        if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
            raise ConfigError("samples must lie within [-1, 1]")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class CurationConfig:
    target_rate: int = 16000
    silence_threshold_db: float = -40.0
    frame_ms: float = 20.0
    min_duration_s: float = 10.0
    max_duration_s: float = 15.0

    def __post_init__(self) -> None:
        if self.target_rate <= 0:
            raise ConfigError(f"target rate must be positive, got {self.target_rate}")
        if self.frame_ms <= 0:
            raise ConfigError(f"frame length must be positive, got {self.frame_ms}")
        if self.silence_threshold_db >= 0:
            raise ConfigError(
                f"silence threshold must be below 0 dBFS, got {self.silence_threshold_db}"
            )
        if not 0 < self.min_duration_s < self.max_duration_s:
            raise ConfigError(
                f"need 0 < min duration < max duration, got "
                f"{self.min_duration_s} and {self.max_duration_s}"
            )

    def as_dict(self) -> dict:
        return {
            "target_rate": self.target_rate,
            "silence_threshold_db": self.silence_threshold_db,
            "frame_ms": self.frame_ms,
            "min_duration_s": self.min_duration_s,
            "max_duration_s": self.max_duration_s,
        }


# ---------------------------------------------------------------------------
# WAV container


def parse_wav(data: bytes, source: str = "") -> AudioClip:
    """Decode a RIFF/WAVE byte string to a mono clip.

    Accepts 16-bit PCM and 32-bit IEEE float, mono or multichannel
    (channels are averaged). The fmt chunk must precede the data chunk.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainerError(f"{source or 'input'}: not a RIFF/WAVE container")
    fmt: tuple[int, int, int, int] | None = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        body_start = offset + 8
        if body_start + size > len(data):
            raise MalformedContainerError(
                f"{source or 'input'}: chunk {chunk_id!r} overruns the file"
            )
        body = data[body_start : body_start + size]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body, source)
        elif chunk_id == b"data":
            if fmt is None:
                raise MalformedContainerError(
                    f"{source or 'input'}: data chunk precedes fmt chunk"
                )
            return _decode_data(body, fmt, source)
        offset = body_start + size + (size & 1)
    if fmt is None:
        raise MalformedContainerError(f"{source or 'input'}: no fmt chunk")
    raise MissingDataChunkError(f"{source or 'input'}: no data chunk")


def _parse_fmt(body: bytes, source: str) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise MalformedContainerError(f"{source or 'input'}: fmt chunk too short")
    codec, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", body, 0)
    if codec == _WAVE_EXTENSIBLE:
        # Actual codec lives in the first two bytes of the SubFormat GUID.
        if len(body) < 26:
            raise MalformedContainerError(f"{source or 'input'}: truncated extensible fmt")
        (codec,) = struct.unpack_from("<H", body, 24)
    if channels < 1 or sample_rate < 1:
        raise MalformedContainerError(
            f"{source or 'input'}: fmt declares {channels} channels at {sample_rate} Hz"
        )
    return codec, channels, sample_rate, bits


def _decode_data(body: bytes, fmt: tuple[int, int, int, int], source: str) -> AudioClip:
    codec, channels, sample_rate, bits = fmt
    if codec == _WAVE_PCM and bits == 16:
        raw = np.frombuffer(body[: len(body) - len(body) % (2 * channels)], dtype="<i2")
        samples = raw.astype(np.float64) / _INT16_SCALE
    elif codec == _WAVE_FLOAT and bits == 32:
        raw = np.frombuffer(body[: len(body) - len(body) % (4 * channels)], dtype="<f4")
        samples = np.clip(raw.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedEncodingError(codec, detail=f"{bits}-bit")
    if channels > 1:
        frames = samples.size // channels
        samples = samples[: frames * channels].reshape(frames, channels).mean(axis=1)
    return AudioClip(samples=samples, sample_rate=sample_rate, source=source)


def encode_wav(clip: AudioClip) -> bytes:
    """Encode a clip as mono 16-bit PCM little-endian WAV bytes.

    Quantization rounds half away from zero and clips at full scale, so
    decoding a 16-bit file and re-encoding it reproduces the bytes
    exactly.
    """
    x = clip.samples * _INT16_SCALE
    q = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
    q = np.clip(q, -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        _WAVE_PCM,
        1,
        clip.sample_rate,
        clip.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    return header + payload


def save_wav(clip: AudioClip, path: str | Path) -> None:
    Path(path).write_bytes(encode_wav(clip))


def load_wav(path: str | Path) -> AudioClip:
    path = Path(path)
    return parse_wav(path.read_bytes(), source=path.name)


# ---------------------------------------------------------------------------
# Resampling


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Windowed-sinc resampling to ``target_rate``.

    Kaiser-windowed sinc kernel, 64-tap half-width at the lower of the
    two rates, cut off at the lower Nyquist frequency. Equal rates are a
    bit-exact pass-through. Output length is ``round(N * target/source)``
    (half away from zero).
    """
    if target_rate <= 0:
        raise ConfigError(f"target rate must be positive, got {target_rate}")
    if target_rate == clip.sample_rate:
        return clip
    source_rate = clip.sample_rate
    n_in = clip.samples.size
    n_out = int(math.floor(n_in * target_rate / source_rate + 0.5))
    if n_in == 0 or n_out == 0:
        return AudioClip(np.zeros(0), sample_rate=target_rate, source=clip.source)

    ratio = target_rate / source_rate
    scale = min(1.0, ratio)  # cutoff at the lower Nyquist, in input units
    half_width = int(math.ceil(KERNEL_HALF_WIDTH / scale))
    taps = np.arange(-half_width, half_width + 1, dtype=np.float64)
    x = clip.samples
    out = np.empty(n_out, dtype=np.float64)
    block = 8192
    for start in range(0, n_out, block):
        stop = min(start + block, n_out)
        positions = np.arange(start, stop, dtype=np.float64) * (source_rate / target_rate)
        base = np.floor(positions).astype(np.int64)
        frac = positions - base
        offsets = frac[:, None] - taps[None, :]
        kernel = scale * np.sinc(scale * offsets) * _kaiser(offsets, half_width)
        idx = base[:, None] + taps.astype(np.int64)[None, :]
        valid = (idx >= 0) & (idx < n_in)
        gathered = np.where(valid, x[np.clip(idx, 0, n_in - 1)], 0.0)
        out[start:stop] = np.einsum("ij,ij->i", gathered, kernel)
    np.clip(out, -1.0, 1.0, out=out)
    return AudioClip(samples=out, sample_rate=target_rate, source=clip.source)


def _kaiser(offsets: np.ndarray, half_width: float) -> np.ndarray:
    inside = np.abs(offsets) <= half_width
    arg = np.zeros_like(offsets)
    np.clip(1.0 - (offsets / half_width) ** 2, 0.0, None, out=arg)
    return np.where(inside, np.i0(KAISER_BETA * np.sqrt(arg)) / np.i0(KAISER_BETA), 0.0)


# ---------------------------------------------------------------------------
# Silence trimming


def _frame_rms(samples: np.ndarray, frame_len: int) -> np.ndarray:
    n_frames = math.ceil(samples.size / frame_len)
    rms = np.empty(n_frames, dtype=np.float64)
    for i in range(n_frames):
        frame = samples[i * frame_len : (i + 1) * frame_len]
        rms[i] = math.sqrt(float(frame @ frame) / frame.size)
    return rms


def trim_silence(clip: AudioClip, config: CurationConfig | None = None) -> AudioClip:
    """Drop maximal leading and trailing runs of silent frames.

    Frames are non-overlapping ``frame_ms`` windows anchored at sample 0;
    a frame is silent when its RMS falls below the dBFS threshold.
    Interior silence is untouched. Returns an empty clip when every frame
    is silent; trimming is idempotent because cuts land on frame
    boundaries.
    """
    config = config or CurationConfig()
    if clip.samples.size == 0:
        return clip
    frame_len = max(1, round(config.frame_ms / 1000.0 * clip.sample_rate))
    rms = _frame_rms(clip.samples, frame_len)
    gate = 10.0 ** (config.silence_threshold_db / 20.0)
    loud = np.flatnonzero(rms >= gate)
    if loud.size == 0:
        return AudioClip(np.zeros(0), sample_rate=clip.sample_rate, source=clip.source)
    start = int(loud[0]) * frame_len
    stop = min(clip.samples.size, (int(loud[-1]) + 1) * frame_len)
    if start == 0 and stop == clip.samples.size:
        return clip
    return AudioClip(clip.samples[start:stop], sample_rate=clip.sample_rate, source=clip.source)


# ---------------------------------------------------------------------------
# Packing


@dataclass(frozen=True)
class SourceSpan:
    """Half-open sample range a source contributed to a packed output."""

    path: str
    start_sample: int
    end_sample: int


@dataclass(frozen=True)
class PackedClip:
    clip: AudioClip
    sources: tuple[SourceSpan, ...]
    flagged_remainder: bool


def concatenate_to_target(
    clips: list[AudioClip], config: CurationConfig | None = None
) -> list[PackedClip]:
    """Greedy in-order packing of clips into the configured duration band.

    Clips append to the current output until it reaches the minimum
    duration; a clip that would push past the maximum starts the next
    output instead. Overlong clips pass through alone. Any output shorter
    than the minimum (the final remainder, or a buffer forced shut by an
    oversized successor) is flagged. Sample order is fully preserved.
    """
    config = config or CurationConfig()
    for clip in clips:
        if clip.sample_rate != config.target_rate:
            raise SampleRateMismatchError(
                f"{clip.source or 'clip'}: rate {clip.sample_rate} != "
                f"target {config.target_rate}"
            )
    outputs: list[PackedClip] = []
    pending: list[AudioClip] = []
    pending_samples = 0
    rate = config.target_rate

    def close() -> None:
        nonlocal pending, pending_samples
        if not pending:
            return
        spans = []
        cursor = 0
        for piece in pending:
            spans.append(SourceSpan(piece.source, cursor, cursor + piece.samples.size))
            cursor += piece.samples.size
        merged = np.concatenate([piece.samples for piece in pending])
        duration = merged.size / rate
        outputs.append(
            PackedClip(
                clip=AudioClip(merged, sample_rate=rate, source=""),
                sources=tuple(spans),
                flagged_remainder=duration < config.min_duration_s,
            )
        )
        pending = []
        pending_samples = 0

    for clip in clips:
        if clip.samples.size == 0:
            continue
        if pending and (pending_samples + clip.samples.size) / rate > config.max_duration_s:
            close()
        pending.append(clip)
        pending_samples += clip.samples.size
        if pending_samples / rate >= config.min_duration_s:
            close()
    close()
    return outputs


# ---------------------------------------------------------------------------
# Directory pipeline


@dataclass
class CurationManifest:
    """Audit record of one curation run."""

    outputs: list[dict] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "outputs": self.outputs,
            "dropped": self.dropped,
            "errors": self.errors,
            "config": self.config,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def curate_directory(
    in_dir: str | Path, out_dir: str | Path, config: CurationConfig | None = None
) -> CurationManifest:
    """Run the full pipeline over every WAV file in ``in_dir``.

    Files process in lexicographic name order: parse, resample to the
    target rate, trim edge silence. Files that fail to parse are recorded
    under ``errors`` without aborting the batch; files empty after
    trimming are recorded under ``dropped``. Survivors are packed and
    written to ``out_dir`` as 16-bit PCM WAV plus a JSON manifest.
    """
    config = config or CurationConfig()
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    if not in_dir.is_dir():
        raise ConfigError(f"input directory does not exist: {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = CurationManifest(config=config.as_dict())
    survivors: list[AudioClip] = []
    for name in sorted(p.name for p in in_dir.iterdir() if p.is_file()):
        if not name.lower().endswith(".wav"):
            continue
        try:
            clip = load_wav(in_dir / name)
            clip = resample(clip, config.target_rate)
            clip = trim_silence(clip, config)
        except Exception as exc:  # noqa: BLE001 - per-file isolation is the contract
            manifest.errors.append({"path": name, "error": str(exc)})
            continue
        if clip.samples.size == 0:
            manifest.dropped.append(name)
            continue
        survivors.append(clip)

    for index, packed in enumerate(concatenate_to_target(survivors, config)):
        out_name = f"utterance_{index:04d}.wav"
        save_wav(packed.clip, out_dir / out_name)
        manifest.outputs.append(
            {
                "output_path": out_name,
                "duration_s": packed.clip.duration_s,
                "sources": [
                    {
                        "path": span.path,
                        "start_sample": span.start_sample,
                        "end_sample": span.end_sample,
                    }
                    for span in packed.sources
                ],
                "flagged_remainder": packed.flagged_remainder,
            }
        )
    (out_dir / "curation_manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest
