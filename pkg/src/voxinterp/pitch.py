"""Pitch-period epochs and the pitch descriptors FXMEDIAN, FXIQR and PPQ.

Frame-level F0 comes from normalized cross-correlation (25 ms window, 10 ms
hop) smoothed by a Viterbi search over per-frame lag candidates. Epochs are
then laid down inside every voiced run by stepping one local period at a time
from the run's most periodic frame, snapping each step to the strongest peak
of the linear-prediction residual near the predicted instant.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from .errors import InsufficientVoicingError, TooShortError
from .lpc import inverse_filter, lpc

WINDOW_S = 0.025
HOP_S = 0.010
EXCITATION_LOWPASS_HZ = 1000.0


@dataclass(frozen=True)
class PitchConfig:
    f0_min: float = 50.0
    f0_max: float = 500.0
    voicing_ncc_threshold: float = 0.6
    rms_fraction: float = 0.01
    ppq_half_width: int = 2
    lag_weight: float = 0.3
    transition_weight: float = 0.5
    candidate_floor: float = 0.3
    max_candidates: int = 8
    subharmonic_ratio: float = 0.8
    subharmonic_penalty: float = 0.5


@dataclass(frozen=True, eq=False)
class EpochTrack:
    """Epoch instants plus the frame-level voicing analysis they came from.

    ``periods`` is ``diff(epoch_times)``. Periods that straddle two voiced
    runs, or fall outside the F0 search range, are flagged false in
    ``period_valid`` and ignored by every descriptor.
    """

    epoch_times: np.ndarray
    periods: np.ndarray
    period_valid: np.ndarray
    frame_times: np.ndarray
    voicing: np.ndarray
    periodicity: np.ndarray
    f0: np.ndarray
    hop: float = HOP_S

    @property
    def n_voiced(self):
        return int(np.count_nonzero(self.voicing))

    def voiced_at(self, times):
        """Voicing decision of the frame nearest to each time in ``times``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        n = self.frame_times.size
        if n == 0:
            return np.zeros(times.shape, dtype=bool)
        idx = np.rint((times - self.frame_times[0]) / self.hop).astype(int)
        inside = (idx >= 0) & (idx < n)
        return inside & self.voicing[np.clip(idx, 0, n - 1)]

    def period_runs(self):
        """Maximal runs of consecutive valid periods, as arrays in seconds."""
        runs, current = [], []
        for p, ok in zip(self.periods, self.period_valid):
            if ok:
                current.append(p)
            elif current:
                runs.append(np.asarray(current))
                current = []
        if current:
            runs.append(np.asarray(current))
        return runs

    def valid_periods(self):
        return self.periods[self.period_valid]


def _parabolic(y, i):
    """Vertex offset and height of the parabola through y[i-1], y[i], y[i+1]."""
    a, b, c = y[i - 1], y[i], y[i + 1]
    denom = a - 2 * b + c
    if denom >= 0:
        return 0.0, b
    delta = 0.5 * (a - c) / denom
    return delta, b - 0.25 * (a - c) * delta


def _candidates(ncc, lag0, cfg):
    """Local maxima of ``ncc`` as (lag, score) pairs, best first."""
    y = ncc
    inner = np.arange(1, y.size - 1)
    peaks = inner[(y[inner] >= y[inner - 1]) & (y[inner] > y[inner + 1])
                  & (y[inner] >= cfg.candidate_floor)]
    out = []
    for i in peaks:
        delta, value = _parabolic(y, i)
        out.append((lag0 + i + delta, min(value, 1.0)))
    out.sort(key=lambda c: -c[1])
    return out[:cfg.max_candidates]


def _local_costs(cands, lag_max, cfg):
    """Per-candidate cost, favouring short lags and penalizing subharmonics.

    A lag is treated as a subharmonic when another candidate near ``lag / m``
    (``m`` = 2, 3, 4; 4 % tolerance) scores at least ``subharmonic_ratio``
    times as high: a periodic excitation correlates almost equally well at
    every multiple of its period.
    """
    lags = np.array([lag for lag, _ in cands])
    vals = np.array([v for _, v in cands])
    scale = vals * (1 - cfg.lag_weight * lags / lag_max)
    for a in range(lags.size):
        for m in (2, 3, 4):
            near = np.abs(lags * m - lags[a]) <= 0.04 * lags[a]
            if np.any(near & (vals >= cfg.subharmonic_ratio * vals[a])):
                scale[a] *= 1 - cfg.subharmonic_penalty
                break
    return 1 - scale


def _viterbi(cands, lag_max, cfg):
    """Least-cost lag path through one voiced run's candidate lists."""
    cost = _local_costs(cands[0], lag_max, cfg)
    back = []
    for j in range(1, len(cands)):
        prev = np.array([lag for lag, _ in cands[j - 1]])
        cur = np.array([lag for lag, _ in cands[j]])
        local = _local_costs(cands[j], lag_max, cfg)
        trans = cfg.transition_weight * np.abs(np.log(cur[:, None] / prev[None, :]))
        total = cost[None, :] + trans
        arg = np.argmin(total, axis=1)
        back.append(arg)
        cost = total[np.arange(cur.size), arg] + local
    path = [int(np.argmin(cost))]
    for arg in reversed(back):
        path.append(int(arg[path[-1]]))
    path.reverse()
    return np.array([cands[j][k][0] for j, k in enumerate(path)])


def _refine_peak(e, k, oversample=32, half=8):
    """Sub-sample location of a residual peak near integer index ``k``."""
    lo, hi = max(0, k - half), min(e.size, k + half + 1)
    seg = e[lo:hi]
    if seg.size < 3:
        return float(k)
    fine = np.linspace(k - 1, k + 1, 2 * oversample + 1)
    idx = np.arange(lo, hi)
    vals = np.sinc(fine[:, None] - idx[None, :]) @ seg
    m = int(np.argmax(vals))
    if 0 < m < vals.size - 1:
        delta, _ = _parabolic(vals, m)
    else:
        delta = 0.0
    return float(fine[m] + delta * (fine[1] - fine[0]))


def _place_epochs(e, lo, hi, centers, lags, anchor_center):
    """Epoch sample positions inside [lo, hi) for one voiced run."""
    def period_at(n):
        return float(np.interp(n, centers, lags))

    p = period_at(anchor_center)
    a = max(lo, int(np.floor(anchor_center - p / 2)))
    b = min(hi, int(np.ceil(anchor_center + p / 2)) + 1)
    if b - a < 3:
        return []
    window = e[a:b]
    k = a + int(np.argmax(np.abs(window)))
    polarity = 1.0 if e[k] >= 0 else -1.0
    pe = polarity * e
    anchor = _refine_peak(pe, k)
    epochs = [anchor]

    for direction in (1, -1):
        n = anchor
        while True:
            p = period_at(n)
            pred = n + direction * p
            s0 = int(np.ceil(pred - 0.2 * p))
            s1 = int(np.floor(pred + 0.2 * p))
            if s0 < lo or s1 > hi - 1:
                break
            k = s0 + int(np.argmax(pe[s0:s1 + 1]))
            t = _refine_peak(pe, k)
            if (t - n) * direction <= 0.5 * p:
                break
            epochs.append(t)
            n = t
    return sorted(epochs)


def track_pitch(clip, config=None):
    """Frame-level F0, voicing and pitch-period epochs for ``clip``.

    Returns an :class:`EpochTrack`; an entirely unvoiced clip yields an empty
    epoch list rather than an error.
    """
    cfg = config or PitchConfig()
    x = clip.samples
    sr = clip.sample_rate
    N = x.size
    if N < 0.1 * sr:
        raise TooShortError(f"clip of {N / sr * 1000:.0f} ms is below 100 ms")

    W = int(round(WINDOW_S * sr))
    H = int(round(HOP_S * sr))
    lag_lo = max(2, int(np.floor(sr / cfg.f0_max)))
    lag_hi = int(np.ceil(sr / cfg.f0_min))
    first = lag_lo - 1
    span = W + lag_hi + 1
    n_frames = 1 + (max(N, span) - span) // H
    starts = H * np.arange(n_frames)
    centers = starts + W // 2
    clip_rms = np.sqrt(np.mean(x * x))

    # Linear-prediction residual, one hop-sized block per frame, so that the
    # correlation sees the excitation rather than formant ringing.
    order = int(round(sr / 1000)) + 2
    hann = signal.windows.hann(W, sym=False)
    xz = np.concatenate([x, np.zeros(max(0, span - N))])
    resid = np.zeros(N)
    for i in range(n_frames):
        a = lpc(xz[starts[i]:starts[i] + W] * hann, order)
        b0 = 0 if i == 0 else centers[i] - H // 2
        b1 = N if i == n_frames - 1 else min(N, centers[i] + H - H // 2)
        if b1 > b0:
            resid[b0:b1] = inverse_filter(x, a, b0, b1)
    sos = signal.butter(4, min(EXCITATION_LOWPASS_HZ, 0.45 * sr), fs=sr, output="sos")
    smooth = signal.sosfiltfilt(sos, resid) if N > 27 else resid

    xp = np.concatenate([smooth, np.zeros(max(0, span - N))])
    csum = np.concatenate([[0.0], np.cumsum(xp * xp)])
    raw_sq = np.concatenate([[0.0], np.cumsum(xz * xz)])
    lag_idx = np.arange(first, lag_hi + 2)

    periodicity = np.zeros(n_frames)
    frame_rms = np.zeros(n_frames)
    cands = []
    for i, s in enumerate(starts):
        frame_rms[i] = np.sqrt(max(raw_sq[s + W] - raw_sq[s], 0.0) / W)
        ref = xp[s:s + W]
        e_ref = csum[s + W] - csum[s]
        if frame_rms[i] <= 0 or e_ref <= 1e-20:
            cands.append([])
            continue
        windows = sliding_window_view(xp[s + first:s + lag_hi + 1 + W], W)
        num = windows @ ref
        e_lag = csum[s + lag_idx + W] - csum[s + lag_idx]
        tiny = 1e-12 * e_ref
        ncc = num / np.sqrt(e_ref * np.maximum(e_lag, tiny))
        ncc[e_lag <= tiny] = 0.0
        c = _candidates(ncc, first, cfg)
        cands.append(c)
        if c:
            periodicity[i] = max(0.0, min(1.0, c[0][1]))

    voicing = ((periodicity >= cfg.voicing_ncc_threshold)
               & (frame_rms >= cfg.rms_fraction * clip_rms) & (frame_rms > 0))

    lags = np.zeros(n_frames)
    runs = []
    i = 0
    while i < n_frames:
        if not voicing[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_frames and voicing[j + 1]:
            j += 1
        lags[i:j + 1] = _viterbi(cands[i:j + 1], lag_hi, cfg)
        runs.append((i, j))
        i = j + 1
    f0 = np.where(voicing, sr / np.where(lags > 0, lags, 1.0), 0.0)

    epoch_samples, run_ids = [], []
    for r, (i, j) in enumerate(runs):
        lo = max(0, centers[i] - H // 2)
        hi = min(N, centers[j] + H - H // 2)
        best = i + int(np.argmax(periodicity[i:j + 1]))
        ep = _place_epochs(resid, lo, hi, centers[i:j + 1].astype(float), lags[i:j + 1],
                           float(centers[best]))
        epoch_samples.extend(ep)
        run_ids.extend([r] * len(ep))

    epoch_times = np.asarray(epoch_samples, dtype=float) / sr
    run_ids = np.asarray(run_ids, dtype=int)
    periods = np.diff(epoch_times)
    valid = ((run_ids[1:] == run_ids[:-1])
             & (periods >= 1.0 / cfg.f0_max - 1e-9) & (periods <= 1.0 / cfg.f0_min + 1e-9)
             if periods.size else np.zeros(0, dtype=bool))

    return EpochTrack(
        epoch_times=epoch_times,
        periods=periods,
        period_valid=valid,
        frame_times=centers / sr,
        voicing=voicing,
        periodicity=periodicity,
        f0=f0,
        hop=H / sr,
    )


def semitones(freq_hz):
    """Pitch in semitones re 1 Hz."""
    return 12.0 * np.log2(freq_hz)


def _frequencies(track, min_periods=10):
    p = track.valid_periods()
    if p.size < min_periods:
        raise InsufficientVoicingError(f"only {p.size} valid pitch periods (need {min_periods})")
    return 1.0 / p


def fx_median(track):
    """Median per-period fundamental frequency, in semitones."""
    return float(semitones(np.median(_frequencies(track))))


def fx_iqr(track):
    """Inter-quartile range of per-period frequency, in semitones."""
    q1, q3 = np.percentile(_frequencies(track), [25, 75])
    return float(12.0 * np.log2(q3 / q1))


def ppq_from_runs(runs, half_width=2):
    """Period perturbation quotient (percent) over runs of consecutive periods.

    Each period is compared with the mean of the ``2k + 1`` periods centred on
    it; runs contribute in proportion to their number of complete windows.
    """
    k = half_width
    total, count = 0.0, 0
    for run in runs:
        run = np.asarray(run, dtype=float)
        n_win = run.size - 2 * k
        if n_win < 1:
            continue
        local = sliding_window_view(run, 2 * k + 1).mean(axis=1)
        dev = np.abs(run[k:run.size - k] - local)
        total += n_win * (100.0 * dev.mean() / run.mean())
        count += n_win
    if count == 0:
        raise InsufficientVoicingError(f"no voiced run with {2 * k + 1} consecutive periods")
    return total / count


def ppq(track, half_width=2):
    return ppq_from_runs(track.period_runs(), half_width)
