"""Independent reference computations used by the tests.

Nothing here imports from ``voxinterp``: each oracle recomputes a quantity
from first principles (stdlib, explicit formulas, brute force) so that the
library is checked against something it did not produce.
"""

import math
import struct
import wave

import numpy as np
from scipy import integrate


def write_wav_stdlib(path, frames, sample_rate=16000, channels=1):
    """Write 16-bit integer frames (``n`` or ``n x channels``) with :mod:`wave`."""
    data = np.asarray(frames, dtype=np.int16)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(data.astype("<i2").tobytes())


def write_float_wav(path, samples, sample_rate=16000, channels=1, extra_chunk=True):
    """Hand-packed IEEE-float WAV, optionally with a ``LIST`` chunk before ``data``."""
    x = np.asarray(samples, dtype="<f4")
    payload = x.tobytes()
    fmt = struct.pack("<HHIIHH", 3, channels, sample_rate, sample_rate * 4 * channels,
                      4 * channels, 32)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    if extra_chunk:
        info = b"INFOtest"
        chunks += b"LIST" + struct.pack("<I", len(info)) + info
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)


def dft_peak_hz(x, sample_rate):
    """Frequency of the largest DFT magnitude, refined by a parabola in dB."""
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    k = int(np.argmax(spec[1:-1])) + 1
    a, b, c = np.log(spec[k - 1:k + 2])
    delta = 0.5 * (a - c) / (a - 2 * b + c)
    return (k + delta) * sample_rate / len(x)


def semitone(f):
    return 12.0 * math.log2(f)


def ppq_by_hand(periods, k=2):
    """PPQ of one run written out as a plain loop."""
    n = len(periods)
    devs = []
    for i in range(k, n - k):
        local = sum(periods[i - k:i + k + 1]) / (2 * k + 1)
        devs.append(abs(periods[i] - local))
    return 100.0 * (sum(devs) / len(devs)) / (sum(periods) / n)


def quartiles_type7(values):
    """Linear-interpolation quartiles computed from the sorted list."""
    v = sorted(values)
    n = len(v)

    def q(p):
        h = (n - 1) * p
        lo = math.floor(h)
        hi = min(lo + 1, n - 1)
        return v[lo] + (h - lo) * (v[hi] - v[lo])

    return q(0.25), q(0.75)


def ols_slope(x, y):
    """Closed-form slope sum((x - mx)(y - my)) / sum((x - mx)^2)."""
    mx = sum(x) / len(x)
    my = sum(y) / len(y)
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / sum((a - mx) ** 2 for a in x)


def tube_length_by_hand(freqs, c=350.0):
    num = sum((2 * n - 1) * f for n, f in enumerate(freqs, start=1))
    den = sum((2 * n - 1) ** 2 for n in range(1, len(freqs) + 1))
    return 100.0 * c / (4.0 * num / den)


def normal_equations(X, y):
    """OLS with intercept via the explicit inverse of the normal matrix."""
    A = np.column_stack([np.ones(len(y)), X])
    beta = np.linalg.inv(A.T @ A) @ A.T @ y
    return beta[1:], beta[0]


def chi2_sf_quadrature(stat, df):
    """Upper tail of the chi-square distribution by integrating its density."""
    k = df / 2.0
    log_norm = k * math.log(2.0) + math.lgamma(k)

    def pdf(t):
        if t <= 0:
            return 0.0
        return math.exp((k - 1) * math.log(t) - t / 2.0 - log_norm)

    if stat <= 0:
        return 1.0
    cdf, _ = integrate.quad(pdf, 0.0, stat, limit=200, epsabs=1e-13, epsrel=1e-12)
    return 1.0 - cdf


def brute_force_pca(X):
    """Eigenvalues (descending) and eigenvectors of the explicit covariance."""
    X = np.asarray(X, dtype=float)
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    w, v = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order].T


def principal_angles(A, B):
    """Principal angles (radians) between the row spaces of ``A`` and ``B``."""
    qa, _ = np.linalg.qr(np.asarray(A, dtype=float).T)
    qb, _ = np.linalg.qr(np.asarray(B, dtype=float).T)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def finite_difference(f, param, eps=1e-6):
    """Central differences of scalar ``f()`` with respect to every entry of ``param``."""
    grad = np.zeros_like(param)
    it = np.nditer(param, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = param[idx]
        param[idx] = old + eps
        up = f()
        param[idx] = old - eps
        down = f()
        param[idx] = old
        grad[idx] = (up - down) / (2 * eps)
    return grad


def pearson(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a - a.mean()
    b = b - b.mean()
    return float(np.sum(a * b) / math.sqrt(np.sum(a * a) * np.sum(b * b)))
