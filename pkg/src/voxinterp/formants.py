"""Formant tracking and vocal tract length from a best-fit half-open tube."""

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .audio_io import frame_signal
from .errors import InsufficientFormantsError, InsufficientVoicingError, InvalidFormantsError
from .lpc import lpc

# (2n - 1) for the first four quarter-wave resonances.
_ODD = np.array([1.0, 3.0, 5.0, 7.0])


@dataclass(frozen=True)
class FormantConfig:
    lpc_order: int = 18
    pre_emphasis: float = 0.97
    frame_s: float = 0.025
    hop_s: float = 0.010
    freq_range_hz: tuple = (90.0, 5500.0)
    formant_bw_max_hz: float = 400.0
    f1_max_hz: float = 1200.0
    speed_of_sound_mps: float = 350.0
    length_range_cm: tuple = (8.0, 25.0)
    min_reliable_frames: int = 10


@dataclass(frozen=True, eq=False)
class FormantFrame:
    time: float
    freqs: np.ndarray
    bandwidths: np.ndarray
    reliable: bool


def tube_fit_length(freqs, c=350.0):
    """Length in cm of the half-open tube whose resonances best fit ``freqs``.

    The model resonances are ``(2n - 1) * x`` with ``x = c / 4L``. Least
    squares in ``x`` has the closed form ``sum((2n-1) F_n) / sum((2n-1)^2)``.
    """
    f = np.asarray(freqs, dtype=float)
    if f.ndim != 1 or f.size < 1 or np.any(f <= 0) or np.any(np.diff(f) <= 0):
        raise InvalidFormantsError(f"formants must be positive and increasing, got {f}")
    odd = 2.0 * np.arange(1, f.size + 1) - 1.0
    x = np.dot(odd, f) / np.dot(odd, odd)
    return 100.0 * c / (4.0 * x)


def lpc_resonances(frame, sample_rate, order):
    """Frequencies and bandwidths (Hz) of the LPC poles in the upper half plane."""
    a = lpc(frame, order)
    if not np.any(a[1:]):
        return np.zeros(0), np.zeros(0)
    roots = np.roots(a)
    roots = roots[np.imag(roots) > 0]
    freqs = np.angle(roots) * sample_rate / (2 * np.pi)
    with np.errstate(divide="ignore"):
        bws = -np.log(np.abs(roots)) * sample_rate / np.pi
    order_idx = np.argsort(freqs)
    return freqs[order_idx], bws[order_idx]


def estimate_formants(clip, track, config=None):
    """F1-F4 per voiced frame by the LPC root method."""
    cfg = config or FormantConfig()
    sr = clip.sample_rate
    x = signal.lfilter([1.0, -cfg.pre_emphasis], [1.0], clip.samples)
    emph = type(clip)(np.clip(x, -1, 1), sr, clip.source_id)
    frames = frame_signal(emph, cfg.frame_s, cfg.hop_s, "hann")
    times = frames.center_times
    voiced = track.voiced_at(times)
    if not np.any(voiced):
        raise InsufficientVoicingError("no voiced frames for formant estimation")

    lo, hi = cfg.freq_range_hz
    out = []
    for frame, t in zip(frames.frames[voiced], times[voiced]):
        f, b = lpc_resonances(frame, sr, cfg.lpc_order)
        keep = (f >= lo) & (f <= hi) & (b < cfg.formant_bw_max_hz)
        f, b = f[keep], b[keep]
        reliable = f.size >= 4 and f[0] < cfg.f1_max_hz
        if reliable:
            length = tube_fit_length(f[:4], cfg.speed_of_sound_mps)
            lmin, lmax = cfg.length_range_cm
            reliable = lmin <= length <= lmax
        freqs = np.full(4, np.nan)
        bws = np.full(4, np.nan)
        freqs[:min(4, f.size)] = f[:4]
        bws[:min(4, b.size)] = b[:4]
        out.append(FormantFrame(float(t), freqs, bws, bool(reliable)))
    return out


def vtlen(clip, track, config=None):
    """Mean tube-fit vocal tract length (cm) over reliable formant frames."""
    cfg = config or FormantConfig()
    return vtlen_from_frames(estimate_formants(clip, track, cfg), cfg)


def vtlen_from_frames(frames, config=None):
    cfg = config or FormantConfig()
    good = [f.freqs for f in frames if f.reliable]
    if len(good) < cfg.min_reliable_frames:
        raise InsufficientFormantsError(
            f"{len(good)} reliable formant frames (need {cfg.min_reliable_frames})")
    return float(np.mean([tube_fit_length(f, cfg.speed_of_sound_mps) for f in good]))
