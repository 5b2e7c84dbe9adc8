import struct
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dft_peak_hz, write_float_wav, write_wav_stdlib
from voxinterp.audio_io import (
    AudioClip,
    ShortAudioWarning,
    chunk_min_duration,
    frame_signal,
    load_wav,
    resample_to_16k,
    write_wav,
)
from voxinterp.errors import (
    EmptyAudioError,
    EmptyInputError,
    FormatError,
    TooShortError,
    UnsupportedError,
    UnsupportedRateError,
)


def _clip(seconds, sr=16000, value=0.1, source_id="c"):
    return AudioClip(np.full(int(round(seconds * sr)), value), sr, source_id)


# --- AudioClip -----------------------------------------------------------------

def test_clip_rejects_out_of_range_and_empty():
    with pytest.raises(ValueError):
        AudioClip(np.array([0.0, 1.5]), 16000, "x")
    with pytest.raises(ValueError):
        AudioClip(np.array([0.0, np.nan]), 16000, "x")
    with pytest.raises(EmptyAudioError):
        AudioClip(np.array([]), 16000, "x")


def test_clip_samples_are_read_only():
    clip = _clip(0.01)
    with pytest.raises(ValueError):
        clip.samples[0] = 0.5


# --- load_wav --------------------------------------------------------------------

def test_load_silent_pcm(tmp_path):
    path = tmp_path / "zeros.wav"
    write_wav_stdlib(path, np.zeros(16000, dtype=np.int16))
    clip = load_wav(path)
    assert clip.sample_rate == 16000
    assert len(clip) == 16000
    assert np.all(clip.samples == 0.0)
    assert clip.source_id == "zeros"


def test_stereo_opposite_channels_average_to_zero(tmp_path):
    path = tmp_path / "stereo.wav"
    frames = np.tile([16384, -16384], (800, 1))  # +0.5 / -0.5
    write_wav_stdlib(path, frames, channels=2)
    clip = load_wav(path)
    assert len(clip) == 800
    assert np.all(clip.samples == 0.0)


def test_most_negative_pcm_value_maps_to_minus_one(tmp_path):
    path = tmp_path / "neg.wav"
    write_wav_stdlib(path, np.array([-32768, 0, 32767], dtype=np.int16))
    clip = load_wav(path)
    assert clip.samples[0] == -1.0
    assert clip.samples[2] == 32767 / 32768


def test_float_wav_with_extra_chunk(tmp_path):
    path = tmp_path / "float.wav"
    x = np.array([0.25, -0.5, 0.125, 1.0], dtype=np.float32)
    write_float_wav(path, x, sample_rate=22050)
    clip = load_wav(path)
    assert clip.sample_rate == 22050
    np.testing.assert_array_equal(clip.samples, x.astype(float))


def test_malformed_header(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"RIFX" + b"\0" * 40)
    with pytest.raises(FormatError):
        load_wav(path)


def test_unsupported_codec(tmp_path):
    path = tmp_path / "alaw.wav"
    fmt = struct.pack("<HHIIHH", 6, 1, 8000, 8000, 1, 8)
    body = b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", 4) + b"\0" * 4
    path.write_bytes(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    with pytest.raises(UnsupportedError):
        load_wav(path)


def test_zero_length_payload(tmp_path):
    path = tmp_path / "empty.wav"
    write_wav_stdlib(path, np.zeros(0, dtype=np.int16))
    with pytest.raises(EmptyAudioError):
        load_wav(path)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=200))
def test_write_load_round_trip_within_quantization(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "x.wav"
    clip = AudioClip(np.array(values), 16000, "x")
    write_wav(path, clip)
    back = load_wav(path)
    assert np.max(np.abs(back.samples - clip.samples)) <= 1 / 32768


# --- resample_to_16k -------------------------------------------------------------

def test_resample_identity_at_16k():
    clip = _clip(0.1)
    assert resample_to_16k(clip) is clip


def test_resample_sine_keeps_frequency():
    sr = 32000
    t = np.arange(sr) / sr
    clip = AudioClip(0.5 * np.sin(2 * np.pi * 1000 * t), sr, "sine")
    out = resample_to_16k(clip)
    assert out.sample_rate == 16000
    assert abs(dft_peak_hz(out.samples, 16000) - 1000.0) < 1.0


@pytest.mark.parametrize("sr", [8000, 22050, 32000, 44100, 48000])
def test_resample_preserves_duration(sr):
    clip = AudioClip(np.zeros(sr), sr, "z")
    out = resample_to_16k(clip)
    assert abs(len(out) - 16000) <= 1


def test_resample_48k_length():
    out = resample_to_16k(AudioClip(np.zeros(48000), 48000, "z"))
    assert 15999 <= len(out) <= 16001


def test_resample_rejects_unknown_rate():
    with pytest.raises(UnsupportedRateError):
        resample_to_16k(AudioClip(np.zeros(100), 11025, "z"))


# --- chunk_min_duration ----------------------------------------------------------

def test_chunk_70s_into_30_and_40():
    segs = chunk_min_duration([_clip(70, sr=100)], 30)
    assert [len(s) / 100 for s in segs] == [30.0, 40.0]


def test_chunk_30s_identity():
    segs = chunk_min_duration([_clip(30, sr=100)], 30)
    assert len(segs) == 1 and len(segs[0]) == 3000


def test_chunk_three_12s_clips():
    clips = [AudioClip(np.full(1200, 0.1 * (i + 1)), 100, f"c{i}") for i in range(3)]
    segs = chunk_min_duration(clips, 30)
    assert len(segs) == 1
    np.testing.assert_array_equal(segs[0].samples, np.concatenate([c.samples for c in clips]))


def test_chunk_short_total_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        segs = chunk_min_duration([_clip(5, sr=100)], 30)
    assert len(segs) == 1
    assert any(issubclass(w.category, ShortAudioWarning) for w in caught)


def test_chunk_empty_input():
    with pytest.raises(EmptyInputError):
        chunk_min_duration([], 30)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 400), min_size=1, max_size=8), st.integers(1, 300))
def test_chunking_conserves_samples(lengths, min_len):
    clips = [AudioClip(np.full(n, 0.01), 100, f"c{i}") for i, n in enumerate(lengths)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShortAudioWarning)
        segs = chunk_min_duration(clips, min_len / 100)
    assert sum(len(s) for s in segs) == sum(lengths)
    if sum(lengths) >= min_len:
        assert all(len(s) >= min_len for s in segs)


# --- frame_signal ----------------------------------------------------------------

def test_frame_count_formula():
    clip = AudioClip(np.zeros(480), 16000, "z")
    fs = frame_signal(clip, 160 / 16000, 80 / 16000, "rectangular")
    assert fs.frames.shape == (5, 160)
    np.testing.assert_allclose(np.diff(fs.start_times), 80 / 16000)


def test_rectangular_first_frame_is_raw():
    x = np.linspace(-0.5, 0.5, 1000)
    fs = frame_signal(AudioClip(x, 16000, "r"), 0.01, 0.005, "rectangular")
    np.testing.assert_array_equal(fs.frames[0], x[:160])


def test_hann_on_constant_signal_equals_hann_curve():
    W = 400
    fs = frame_signal(AudioClip(np.ones(1600), 16000, "h"), W / 16000, 160 / 16000, "hann")
    n = np.arange(W)
    expect = 0.5 - 0.5 * np.cos(2 * np.pi * n / W)
    np.testing.assert_allclose(fs.frames[2], expect, atol=1e-15)


def test_frame_too_short():
    with pytest.raises(TooShortError):
        frame_signal(AudioClip(np.zeros(100), 16000, "s"), 0.025, 0.01)


@settings(max_examples=50, deadline=None)
@given(st.integers(10, 60), st.integers(100, 600))
def test_hop_equal_window_tiles_prefix(W, N):
    if N < W:
        N = W
    x = np.sin(np.arange(N) * 0.37) * 0.5
    fs = frame_signal(AudioClip(x, 1000, "t"), W / 1000, W / 1000, "rectangular")
    n = fs.frames.shape[0]
    np.testing.assert_array_equal(fs.frames.ravel(), x[:n * W])
