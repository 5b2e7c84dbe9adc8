import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ols_slope
from voxinterp.audio_io import AudioClip
from voxinterp.errors import InsufficientVoicingError, MinusInfinityError
from voxinterp.pitch import EpochTrack, track_pitch
from voxinterp.spectral import SpectralConfig, fit_band_slope, gne, gne_pairs, level_db
from voxinterp.spectral import spectral_slope
from voxinterp.synth import synth_vowel

SR = 16000


def forced_voicing(clip, hop=0.01):
    """A track that declares every 10 ms frame voiced."""
    n = int(len(clip) / SR / hop)
    return EpochTrack(np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool),
                      0.0125 + hop * np.arange(n), np.ones(n, dtype=bool), np.ones(n),
                      np.zeros(n), hop)


# --- level ---------------------------------------------------------------------

def test_level_full_scale_square():
    x = np.tile([1.0, -1.0], 800)
    assert level_db(AudioClip(x, SR, "sq")) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("amp, expect", [(1.0, -3.0103), (0.1, -23.0103)])
def test_level_of_sine(amp, expect):
    t = np.arange(SR) / SR
    x = amp * np.sin(2 * np.pi * 100 * t)
    assert level_db(AudioClip(x, SR, "sine")) == pytest.approx(expect, abs=1e-4)


def test_level_of_silence():
    with pytest.raises(MinusInfinityError):
        level_db(AudioClip(np.zeros(100), SR, "z"))


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1.0))
def test_level_gain_equivariant(g):
    x = 0.9 * np.sin(np.arange(1000) * 0.05)
    a = level_db(AudioClip(x, SR, "a"))
    b = level_db(AudioClip(g * x, SR, "b"))
    assert b - a == pytest.approx(20 * np.log10(g), abs=1e-9)


# --- slope -----------------------------------------------------------------------

def test_fit_slope_exact_line():
    centers = [1500, 2000, 2500, 3000, 3500]
    assert fit_band_slope(centers, [0, -3, -6, -9, -12]) == pytest.approx(-6.0)


def test_fit_slope_matches_closed_form():
    centers = [1500, 2000, 2500, 3000, 3500]
    y = [0, -2, -7, -8, -13]
    expect = ols_slope([c / 1000 for c in centers], y)
    assert expect == pytest.approx(-6.4)
    assert fit_band_slope(centers, y) == pytest.approx(expect, abs=1e-12)


def test_slope_flat_when_bands_hold_equal_power():
    t = np.arange(SR) / SR
    x = sum(np.sin(2 * np.pi * f * t) for f in (1250, 1750, 2250, 2750, 3250, 3750))
    clip = AudioClip(0.1 * x, SR, "flat")
    assert spectral_slope(clip, forced_voicing(clip)) == pytest.approx(0.0, abs=0.05)


def test_slope_needs_voiced_frames():
    clip = AudioClip(np.zeros(SR), SR, "z")
    with pytest.raises(InsufficientVoicingError):
        spectral_slope(clip, track_pitch(clip))


@pytest.fixture(scope="module")
def vowel():
    clip = synth_vowel(120, 1.0, jitter=0.005, seed=2)
    return clip, track_pitch(clip)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 1.9))
def test_slope_gain_invariant(vowel, g):
    clip, track = vowel
    scaled = AudioClip(clip.samples * g, SR, "g")
    assert spectral_slope(scaled, track) == pytest.approx(spectral_slope(clip, track), abs=1e-9)


# --- gne -------------------------------------------------------------------------

def test_gne_band_pairs():
    cfg = SpectralConfig()
    centers = np.arange(1500.0, 3500.1, 500.0)
    pairs = gne_pairs(centers, cfg.gne_bandwidth_hz)
    assert [(centers[i], centers[j]) for i, j in pairs] == [(1500.0, 3500.0)]


def test_gne_clean_pulses_high(vowel):
    clip, track = vowel
    assert gne(clip, track) >= 0.9


def test_gne_whisper_proxy_low():
    clip = synth_vowel(120, 1.0, noise=1.0, seed=3)
    assert gne(clip, forced_voicing(clip)) <= 0.6


def test_gne_ordering():
    scores = []
    for noise in (0.0, 0.5, 1.0):
        clip = synth_vowel(120, 1.0, noise=noise, seed=4)
        scores.append(gne(clip, forced_voicing(clip)))
    assert scores[0] > scores[1] > scores[2]
    assert all(0.0 <= s <= 1.0 for s in scores)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.05, 1.9))
def test_gne_gain_invariant(vowel, g):
    clip, track = vowel
    scaled = AudioClip(clip.samples * g, SR, "g")
    assert gne(scaled, track) == pytest.approx(gne(clip, track), abs=1e-9)


def test_gne_needs_voiced_audio():
    clip = AudioClip(np.zeros(SR), SR, "z")
    with pytest.raises(InsufficientVoicingError):
        gne(clip, track_pitch(clip))
