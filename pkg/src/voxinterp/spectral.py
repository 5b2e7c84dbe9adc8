"""Spectral voice-quality descriptors: LEVEL, SLOPE and GNE."""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .audio_io import frame_signal
from .errors import InsufficientVoicingError, MinusInfinityError
from .lpc import inverse_filter, lpc

GNE_RATE = 10000


@dataclass(frozen=True)
class SpectralConfig:
    frame_s: float = 0.025
    hop_s: float = 0.010
    n_fft: int = 512
    slope_band_centers_hz: tuple = (1500.0, 2000.0, 2500.0, 3000.0, 3500.0)
    slope_band_width_hz: float = 1000.0
    gne_bandwidth_hz: float = 3000.0
    gne_center_step_hz: float = 500.0
    gne_center_range_hz: tuple = (1500.0, 3500.0)
    gne_lpc_order: int = 13
    gne_window_s: float = 0.030
    gne_max_lag_s: float = 0.003


@dataclass(frozen=True, eq=False)
class BandEnergySeries:
    center_freqs: np.ndarray
    energies_db: np.ndarray  # (n_voiced_frames, n_bands)
    frame_times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def mean_db(self):
        return self.energies_db.mean(axis=0)


def level_db(clip):
    """RMS level of the whole recording in dB re digital full scale."""
    rms = np.sqrt(np.mean(clip.samples ** 2))
    if rms == 0:
        raise MinusInfinityError(f"{clip.source_id or 'clip'}: all-zero signal has no level")
    return float(20.0 * np.log10(rms))


def band_energies(clip, track, config=None):
    """Per voiced frame, the dB power in rectangular bands around each center."""
    cfg = config or SpectralConfig()
    frames = frame_signal(clip, cfg.frame_s, cfg.hop_s, "hann")
    voiced = track.voiced_at(frames.center_times)
    spec = np.abs(np.fft.rfft(frames.frames[voiced], n=cfg.n_fft, axis=1)) ** 2
    freqs = np.fft.rfftfreq(cfg.n_fft, 1.0 / clip.sample_rate)
    centers = np.asarray(cfg.slope_band_centers_hz, dtype=float)
    half = cfg.slope_band_width_hz / 2
    power = np.stack([spec[:, (freqs >= c - half) & (freqs < c + half)].sum(axis=1)
                      for c in centers], axis=1)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    keep = np.all(np.isfinite(db), axis=1)
    return BandEnergySeries(centers, db[keep], frames.center_times[voiced][keep])


def fit_band_slope(centers_hz, energies_db):
    """OLS slope of band level against center frequency, in dB/kHz."""
    x = np.asarray(centers_hz, dtype=float) / 1000.0
    y = np.asarray(energies_db, dtype=float)
    dx = x - x.mean()
    return float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))


def spectral_slope(clip, track, config=None, min_frames=5):
    """Brightness: line fitted to mean voiced-frame band energies, dB/kHz."""
    bands = band_energies(clip, track, config)
    if bands.energies_db.shape[0] < min_frames:
        raise InsufficientVoicingError(
            f"{bands.energies_db.shape[0]} voiced frames for spectral slope (need {min_frames})")
    return fit_band_slope(bands.center_freqs, bands.mean_db())


def _band_envelopes(excitation, rate, centers, bandwidth):
    """Hilbert envelopes of ``excitation`` band-passed around each center.

    Bands have a Hann-shaped frequency response; keeping only positive
    frequencies gives the analytic signal directly.
    """
    n = excitation.size
    n_fft = 1 << int(np.ceil(np.log2(max(n, 2))))
    spec = np.fft.fft(excitation, n_fft)
    freqs = np.fft.fftfreq(n_fft, 1.0 / rate)
    envs = []
    for c in centers:
        u = (freqs - c) / bandwidth
        resp = np.where((np.abs(u) <= 0.5) & (freqs > 0), 2.0 * np.cos(np.pi * u) ** 2, 0.0)
        envs.append(np.abs(np.fft.ifft(spec * resp))[:n])
    return np.array(envs)


def _max_norm_xcorr(a, b, max_lag):
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
    if denom <= 0:
        return 0.0
    best = -1.0
    n = a.size
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            v = np.dot(a[lag:], b[:n - lag])
        else:
            v = np.dot(a[:n + lag], b[-lag:])
        best = max(best, v / denom)
    return best


def gne_pairs(centers, bandwidth):
    """Index pairs of bands whose centers differ by more than half the bandwidth."""
    return [(i, j) for i in range(len(centers)) for j in range(i + 1, len(centers))
            if centers[j] - centers[i] > bandwidth / 2]


def gne(clip, track, config=None, min_voiced_s=0.2):
    """Glottal-to-noise excitation ratio in [0, 1].

    The signal is resampled to 10 kHz and each voiced hop-sized block is
    inverse filtered by a linear predictor fitted on the window around it.
    Hilbert envelopes of the band-passed excitation are then compared window
    by window: the score of a window is the maximum normalized
    cross-correlation over band pairs whose centers are more than half a
    bandwidth apart, and the median score over windows is returned.
    """
    cfg = config or SpectralConfig()
    sr = clip.sample_rate
    if track.n_voiced * track.hop < min_voiced_s - 1e-9:
        raise InsufficientVoicingError(
            f"{track.n_voiced * track.hop:.3f} s voiced audio for GNE (need {min_voiced_s})")
    g = np.gcd(GNE_RATE, sr)
    x = signal.resample_poly(clip.samples, GNE_RATE // g, sr // g)

    lo, hi = cfg.gne_center_range_hz
    centers = np.arange(lo, hi + 1e-9, cfg.gne_center_step_hz)
    pairs = gne_pairs(centers, cfg.gne_bandwidth_hz)
    if not pairs:
        raise ValueError("GNE band layout yields no band pairs")
    W = int(round(cfg.gne_window_s * GNE_RATE))
    H = int(round(track.hop * GNE_RATE))
    hann = signal.windows.hann(W, sym=False)
    max_lag = int(round(cfg.gne_max_lag_s * GNE_RATE))
    p = cfg.gne_lpc_order

    # Excitation: each hop-sized block inverse filtered by its own predictor.
    starts = range(0, x.size - W + 1, H)
    voiced = [track.voiced_at((s + W / 2) / GNE_RATE)[0] for s in starts]
    exc = np.zeros(x.size)
    for s, v in zip(starts, voiced):
        if v:
            a = lpc(x[s:s + W] * hann, p)
            b0 = s + (W - H) // 2
            exc[b0:b0 + H] = inverse_filter(x, a, b0, b0 + H)
    envs = _band_envelopes(exc, GNE_RATE, centers, cfg.gne_bandwidth_hz)

    scores = []
    for s, v in zip(starts, voiced):
        if not v or not np.any(exc[s:s + W]):
            continue
        seg = envs[:, s:s + W]
        scores.append(max(_max_norm_xcorr(seg[i], seg[j], max_lag) for i, j in pairs))
    if len(scores) < max(1, int(round(min_voiced_s / track.hop)) // 2):
        raise InsufficientVoicingError(f"only {len(scores)} voiced GNE windows")
    return float(np.clip(np.median(scores), 0.0, 1.0))
