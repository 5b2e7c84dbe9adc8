"""Synthetic test signals: band-limited pulse trains and resonator vowels."""

import numpy as np
from scipy import signal

from .audio_io import ANALYSIS_RATE, AudioClip

NEUTRAL_FORMANTS = (500.0, 1500.0, 2500.0, 3500.0)
NEUTRAL_BANDWIDTHS = (60.0, 90.0, 120.0, 160.0)


def pulse_times(f0, duration, jitter=0.0, rng=None, start=0.0):
    """Pulse instants for a train at ``f0`` Hz.

    With ``jitter > 0`` each period is scaled by ``1 + u`` with ``u`` drawn
    uniformly from ``[-jitter, jitter]``.
    """
    rng = np.random.default_rng(rng)
    t0 = 1.0 / f0
    times = []
    t = start
    while t < duration:
        times.append(t)
        t += t0 * (1.0 + (rng.uniform(-jitter, jitter) if jitter else 0.0))
    return np.asarray(times)


def pulse_train(times, duration, sample_rate=ANALYSIS_RATE, half_width=32):
    """Band-limited impulses at fractional sample positions ``times``."""
    n = int(round(duration * sample_rate))
    x = np.zeros(n)
    taps = np.arange(-half_width, half_width + 1)
    win = np.kaiser(taps.size, 8.0)
    for t in times:
        pos = t * sample_rate
        k = int(np.floor(pos))
        idx = k + taps
        kernel = np.sinc(idx - pos) * win
        ok = (idx >= 0) & (idx < n)
        x[idx[ok]] += kernel[ok]
    return x


def resonate(x, formants, bandwidths, sample_rate=ANALYSIS_RATE):
    """Pass ``x`` through a cascade of unit-DC-gain two-pole resonators."""
    y = np.asarray(x, dtype=float)
    for f, bw in zip(formants, bandwidths):
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2 * np.pi * f / sample_rate
        a = [1.0, -2 * r * np.cos(theta), r * r]
        y = signal.lfilter([sum(a)], a, y)
    return y


def synth_vowel(f0, duration=1.0, formants=NEUTRAL_FORMANTS, bandwidths=NEUTRAL_BANDWIDTHS,
                jitter=0.0, noise=0.0, seed=0, peak=0.5, sample_rate=ANALYSIS_RATE,
                source_id="synthetic"):
    """A sustained vowel built from a pulse-train (optionally noisy) source.

    ``noise`` is the fraction of source RMS replaced by white noise: 0 gives a
    clean pulse source, 1 pure noise excitation.
    """
    rng = np.random.default_rng(seed)
    times = pulse_times(f0, duration, jitter=jitter, rng=rng, start=0.5 / f0)
    src = pulse_train(times, duration, sample_rate)
    if noise > 0:
        white = rng.standard_normal(src.size)
        src_rms = np.sqrt(np.mean(src ** 2))
        white *= src_rms / np.sqrt(np.mean(white ** 2))
        src = np.sqrt(1 - noise) * src + np.sqrt(noise) * white
    y = resonate(src, formants, bandwidths, sample_rate)
    y *= peak / np.max(np.abs(y))
    return AudioClip(y, sample_rate, source_id)


def quarter_wave_formants(length_cm, c=350.0, n=4):
    """Resonances of a uniform half-open tube of the given length."""
    x = c / (4.0 * length_cm / 100.0)
    return tuple((2 * k - 1) * x for k in range(1, n + 1))
