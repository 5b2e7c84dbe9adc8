"""Loading, resampling, chunking and framing of speech recordings."""

import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import (
    EmptyAudioError,
    EmptyInputError,
    FormatError,
    TooShortError,
    UnsupportedError,
    UnsupportedRateError,
)

ANALYSIS_RATE = 16000
SUPPORTED_RATES = (8000, 16000, 22050, 32000, 44100, 48000)

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class ShortAudioWarning(UserWarning):
    """Total audio for a speaker is below the requested chunk length."""


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono speech samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if x.size == 0:
            raise EmptyAudioError(f"empty clip {self.source_id!r}")
        if not np.all(np.isfinite(x)):
            raise ValueError("AudioClip samples must be finite")
        if np.max(np.abs(x)) > 1.0:
            raise ValueError("AudioClip samples must lie in [-1, 1]")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError("sample_rate must be a positive integer")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class FrameSequence:
    frames: np.ndarray  # (n_frames, window_samples)
    hop: float
    window: float
    start_times: np.ndarray

    def __len__(self):
        return self.frames.shape[0]

    @property
    def center_times(self):
        return self.start_times + self.window / 2


def _parse_fmt(body):
    if len(body) < 16:
        raise FormatError("fmt chunk too short")
    fmt_tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if fmt_tag == _WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise FormatError("truncated WAVE_FORMAT_EXTENSIBLE header")
        fmt_tag = struct.unpack("<H", body[24:26])[0]
    if channels < 1 or rate < 1 or block_align < 1:
        raise FormatError("invalid fmt chunk fields")
    return fmt_tag, channels, rate, bits


def load_wav(path):
    """Read a RIFF/WAVE file into a mono :class:`AudioClip`.

    PCM 16-bit and IEEE float32 payloads are accepted; channels are averaged.
    Chunks other than ``fmt `` and ``data`` are skipped.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        size = struct.unpack("<I", raw[pos + 4:pos + 8])[0]
        body = raw[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            # Truncated data chunks are tolerated; partial frames are dropped below.
            data = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise FormatError(f"{path}: missing fmt chunk")
    if data is None:
        raise FormatError(f"{path}: missing data chunk")

    fmt_tag, channels, rate, bits = fmt
    if fmt_tag == _WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 32768.0
    elif fmt_tag == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedError(
            f"{path}: unsupported codec (format tag {fmt_tag:#06x}, {bits} bits)")

    frame_bytes = dtype.itemsize * channels
    n_frames = len(data) // frame_bytes
    if n_frames == 0:
        raise EmptyAudioError(f"{path}: zero-length audio payload")
    values = np.frombuffer(data[:n_frames * frame_bytes], dtype=dtype)
    values = values.reshape(n_frames, channels).astype(np.float64) / scale
    mono = values.mean(axis=1)
    if dtype.kind == "f":
        if not np.all(np.isfinite(mono)):
            raise FormatError(f"{path}: non-finite float samples")
        mono = np.clip(mono, -1.0, 1.0)
    return AudioClip(mono, rate, path.stem)


def write_wav(path, clip):
    """Write ``clip`` as mono 16-bit PCM. Used for round trips and fixtures."""
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, _WAVE_FORMAT_PCM, 1, clip.sample_rate,
        clip.sample_rate * 2, 2, 16,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


def _kaiser_lowpass(up, down, zero_crossings=8, beta=5.0):
    # Half-length spans `zero_crossings` lobes of the narrower sinc on each side.
    ratio = max(up, down)
    numtaps = 2 * zero_crossings * ratio + 1
    return signal.firwin(numtaps, 1.0 / ratio, window=("kaiser", beta)) * up


def resample_to_16k(clip):
    """Resample ``clip`` to the 16 kHz analysis rate with a Kaiser-windowed sinc."""
    sr = clip.sample_rate
    if sr not in SUPPORTED_RATES:
        raise UnsupportedRateError(f"unsupported input rate {sr} Hz")
    if sr == ANALYSIS_RATE:
        return clip
    g = math.gcd(ANALYSIS_RATE, sr)
    up, down = ANALYSIS_RATE // g, sr // g
    y = signal.resample_poly(clip.samples, up, down, window=_kaiser_lowpass(up, down))
    return AudioClip(np.clip(y, -1.0, 1.0), ANALYSIS_RATE, clip.source_id)


def chunk_min_duration(clips, min_s=30.0, prefix=None):
    """Concatenate one speaker's clips and cut them into segments of at least ``min_s``.

    A trailing remainder shorter than ``min_s`` is merged into the previous
    segment. When the total is below ``min_s`` a single segment holding all the
    audio is returned and a :class:`ShortAudioWarning` is emitted.
    """
    clips = list(clips)
    if not clips:
        raise EmptyInputError("no clips to chunk")
    rate = clips[0].sample_rate
    if any(c.sample_rate != rate for c in clips):
        raise ValueError("all clips must share a sample rate")
    prefix = clips[0].source_id if prefix is None else prefix
    x = np.concatenate([c.samples for c in clips])
    seg_len = int(round(min_s * rate))

    n_full = x.size // seg_len if seg_len > 0 else 0
    if n_full == 0:
        warnings.warn(
            f"{prefix}: total audio {x.size / rate:.2f} s is below {min_s} s",
            ShortAudioWarning, stacklevel=2)
        bounds = [(0, x.size)]
    else:
        bounds = [(i * seg_len, (i + 1) * seg_len) for i in range(n_full)]
        bounds[-1] = (bounds[-1][0], x.size)
    return [AudioClip(x[a:b], rate, f"{prefix}_{i:03d}") for i, (a, b) in enumerate(bounds)]


def frame_signal(clip, window_s, hop_s, window_shape="hann"):
    """Slice ``clip`` into overlapping frames.

    The frame count is ``1 + floor((N - W) / H)`` with ``W`` and ``H`` the window
    and hop in samples; trailing samples that do not fill a frame are dropped.
    """
    if not 0 < hop_s <= window_s:
        raise ValueError("require 0 < hop_s <= window_s")
    sr = clip.sample_rate
    W = int(round(window_s * sr))
    H = int(round(hop_s * sr))
    N = len(clip)
    if N < W:
        raise TooShortError(f"clip of {N} samples is shorter than the {W}-sample window")
    n_frames = 1 + (N - W) // H
    idx = np.arange(W)[None, :] + H * np.arange(n_frames)[:, None]
    frames = clip.samples[idx]
    if window_shape == "hann":
        frames = frames * signal.windows.hann(W, sym=False)
    elif window_shape != "rectangular":
        raise ValueError(f"unknown window shape {window_shape!r}")
    starts = H * np.arange(n_frames) / sr
    return FrameSequence(frames, H / sr, W / sr, starts)
