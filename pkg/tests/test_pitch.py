import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ppq_by_hand, quartiles_type7, semitone
from voxinterp.audio_io import AudioClip
from voxinterp.errors import InsufficientVoicingError, TooShortError
from voxinterp.pitch import EpochTrack, PitchConfig, fx_iqr, fx_median, ppq, track_pitch
from voxinterp.synth import pulse_times, pulse_train, synth_vowel

SR = 16000


def track_from_periods(periods):
    """A track whose epochs are laid out by the given periods (one voiced run)."""
    periods = np.asarray(periods, dtype=float)
    epochs = np.concatenate([[0.0], np.cumsum(periods)])
    return EpochTrack(epochs, periods, np.ones(periods.size, dtype=bool),
                      np.zeros(0), np.zeros(0, dtype=bool), np.zeros(0), np.zeros(0))


def pulse_clip(f0, seconds=1.0, start=0.0025):
    x = pulse_train(pulse_times(f0, seconds, start=start), seconds, SR)
    return AudioClip(0.5 * x / np.max(np.abs(x)), SR, "pulses")


@pytest.fixture(scope="module")
def pulse_200():
    return track_pitch(pulse_clip(200))


# --- track_pitch -----------------------------------------------------------------

def test_pulse_train_periods(pulse_200):
    p = pulse_200.valid_periods()
    assert p.size > 150
    assert np.all(np.abs(p - 0.005) < 1e-4)
    assert pulse_200.n_voiced / pulse_200.voicing.size >= 0.9


def test_white_noise_mostly_unvoiced():
    x = 0.1 * np.random.default_rng(7).standard_normal(SR)
    tr = track_pitch(AudioClip(np.clip(x, -1, 1), SR, "noise"))
    assert tr.n_voiced / tr.voicing.size < 0.2


def test_silence_has_no_epochs():
    tr = track_pitch(AudioClip(np.zeros(SR), SR, "silence"))
    assert tr.epoch_times.size == 0
    assert not tr.voicing.any()


def test_too_short_clip():
    with pytest.raises(TooShortError):
        track_pitch(AudioClip(np.zeros(1000), SR, "short"))


def test_track_invariants():
    cfg = PitchConfig()
    tr = track_pitch(synth_vowel(150, 1.0, jitter=0.01, seed=3))
    assert np.all(np.diff(tr.epoch_times) > 0)
    assert tr.periods.size == tr.epoch_times.size - 1
    v = tr.valid_periods()
    assert np.all((v >= 1 / cfg.f0_max - 1e-9) & (v <= 1 / cfg.f0_min + 1e-9))
    assert np.all(tr.periodicity[tr.voicing] >= cfg.voicing_ncc_threshold)
    assert np.all((tr.periodicity >= 0) & (tr.periodicity <= 1))


@pytest.mark.parametrize("f0", [80, 120, 200, 300])
def test_no_octave_errors_on_vowel_suite(f0):
    tr = track_pitch(synth_vowel(f0, 1.0, seed=1))
    assert abs(fx_median(tr) - semitone(f0)) < 0.5


@pytest.mark.parametrize("f0", [80, 120, 200, 300])
def test_time_shift_invariance(f0):
    clip = synth_vowel(f0, 1.0, jitter=0.01, seed=5)
    shifted = AudioClip(np.concatenate([np.zeros(400), clip.samples]), SR, "shifted")
    a, b = track_pitch(clip), track_pitch(shifted)
    assert abs(fx_median(a) - fx_median(b)) < 0.1
    assert abs(fx_iqr(a) - fx_iqr(b)) < 0.1
    assert abs(ppq(a) - ppq(b)) < 0.1


# --- fx_median / fx_iqr ------------------------------------------------------------

def test_fx_median_analytic_values():
    assert fx_median(track_from_periods([0.005] * 20)) == pytest.approx(91.7263, abs=1e-4)
    assert fx_median(track_from_periods([0.010] * 20)) == pytest.approx(79.7263, abs=1e-4)


def test_fx_median_alternating_periods():
    periods = [0.004, 0.006] * 6 + [0.005]
    freqs = sorted(1 / p for p in periods)
    assert freqs[len(freqs) // 2] == pytest.approx(200.0)
    assert fx_median(track_from_periods(periods)) == pytest.approx(semitone(200.0))


def test_fx_needs_ten_periods():
    with pytest.raises(InsufficientVoicingError):
        fx_median(track_from_periods([0.005] * 9))
    with pytest.raises(InsufficientVoicingError):
        fx_iqr(track_from_periods([0.005] * 9))


def test_fx_iqr_constant_is_zero():
    assert fx_iqr(track_from_periods([0.005] * 30)) == 0.0


def test_fx_iqr_uniform_frequencies_matches_quartile_oracle():
    freqs = np.linspace(100, 200, 41)
    q1, q3 = quartiles_type7(list(freqs))
    got = fx_iqr(track_from_periods(1 / freqs))
    assert got == pytest.approx(12 * np.log2(q3 / q1), abs=1e-9)
    assert 0 < got < 12


def test_fx_iqr_one_octave_quartiles():
    freqs = [100.0] * 5 + [200.0] * 5
    # type-7 quartiles of a 10-point list with this split land at 100 and 200
    q1, q3 = quartiles_type7(freqs)
    assert (q1, q3) == (100.0, 200.0)
    assert fx_iqr(track_from_periods([1 / f for f in freqs])) == pytest.approx(12.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0021, 0.019), min_size=10, max_size=60))
def test_fx_iqr_non_negative_and_zero_iff_equal_quartiles(periods):
    got = fx_iqr(track_from_periods(periods))
    q1, q3 = quartiles_type7([1 / p for p in periods])
    assert got >= 0
    assert (got == 0) == (q1 == q3)


# --- ppq -----------------------------------------------------------------------------

def test_ppq_periodic_is_zero():
    assert ppq(track_from_periods([0.005] * 20)) == 0.0


def test_ppq_hand_example():
    periods = [5, 5, 5, 6, 5, 5, 5]
    expect = ppq_by_hand(periods)
    assert expect == pytest.approx(7.777777, abs=1e-5)
    assert ppq(track_from_periods(np.array(periods) / 1000)) == pytest.approx(expect, abs=1e-9)


def test_ppq_jitter_range_and_monotone():
    rng = np.random.default_rng(11)
    base = rng.uniform(-1, 1, 2000)
    values = []
    for j in (0.005, 0.01, 0.02):
        periods = 0.005 * (1 + j * base)
        got = ppq(track_from_periods(periods))
        assert got == pytest.approx(ppq_by_hand(list(periods)), rel=1e-9)
        values.append(got)
    assert 0 < values[1] <= 1.5
    assert values[0] < values[1] < values[2]


def test_ppq_needs_a_long_enough_run():
    with pytest.raises(InsufficientVoicingError):
        ppq(track_from_periods([0.005] * 4))


def test_ppq_ignores_windows_across_runs():
    periods = np.array([0.005] * 6 + [0.009] + [0.005] * 6)
    valid = np.ones(periods.size, dtype=bool)
    valid[6] = False
    epochs = np.concatenate([[0.0], np.cumsum(periods)])
    tr = EpochTrack(epochs, periods, valid, np.zeros(0), np.zeros(0, dtype=bool),
                    np.zeros(0), np.zeros(0))
    assert ppq(tr) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.003, 0.012), min_size=5, max_size=40), st.floats(0.2, 5.0))
def test_ppq_scale_invariant(periods, scale):
    a = ppq(track_from_periods(periods))
    b = ppq(track_from_periods(np.array(periods) * scale))
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_ppq_vowel_suite():
    for f0 in (80, 120, 200, 300):
        clean = ppq(track_pitch(synth_vowel(f0, 1.0, seed=1)))
        assert clean <= 0.2
        jittered = [ppq(track_pitch(synth_vowel(f0, 1.0, jitter=j, seed=1)))
                    for j in (0.005, 0.01, 0.02)]
        assert clean < jittered[0] < jittered[1] < jittered[2]
