"""A synthetic speaker cohort with known acoustics and a matching embedding file.

Each speaker gets one sustained vowel whose pitch, vocal tract length, jitter,
breathiness and level are drawn from gender-dependent distributions. The
embeddings are a fixed random linear map of those true parameters, plus a
gender-coded direction and isotropic noise, so every stage of the pipeline
has a known answer.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import write_wav
from .embedding import Embedding, save_embeddings_csv
from .synth import NEUTRAL_BANDWIDTHS, quarter_wave_formants, synth_vowel

# (mean, sd) of F0 in Hz and tract length in cm per gender.
F0_DIST = {"male": (110.0, 10.0), "female": (210.0, 18.0)}
VTL_DIST = {"male": (17.5, 0.6), "female": (14.5, 0.5)}


@dataclass(frozen=True)
class Cohort:
    root: Path
    wavs: tuple
    metadata: Path
    embeddings: Path
    truth: dict  # speaker_id -> dict of generating parameters


def _speaker_params(rng, gender):
    return {
        "gender": gender,
        "f0": float(rng.normal(*F0_DIST[gender])),
        "vtl": float(rng.normal(*VTL_DIST[gender])),
        "jitter": float(np.clip(rng.lognormal(np.log(0.006), 0.4), 0.001, 0.03)),
        "noise": float(np.clip(rng.normal(0.15, 0.06), 0.0, 0.35)),
        "peak": float(np.clip(rng.lognormal(np.log(0.4), 0.3), 0.05, 0.95)),
        "age": float(rng.integers(20, 75)),
    }


def make_cohort(root, n_speakers=200, dim=32, seed=0, duration=1.0, gender_strength=3.0,
                embedding_noise=0.3):
    """Write WAVs (one directory per speaker), metadata and embeddings under ``root``."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    truth, wavs = {}, []
    for i in range(n_speakers):
        spk = f"spk{i:03d}"
        p = _speaker_params(rng, "male" if i % 2 == 0 else "female")
        truth[spk] = p
        clip = synth_vowel(p["f0"], duration, quarter_wave_formants(p["vtl"]), NEUTRAL_BANDWIDTHS,
                           jitter=p["jitter"], noise=p["noise"], seed=seed * 100003 + i,
                           peak=p["peak"], source_id=spk)
        d = root / "audio" / spk
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"{spk}.wav"
        write_wav(path, clip)
        wavs.append(path)

    meta = root / "metadata.csv"
    with meta.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["speaker_id", "gender", "age"])
        for spk, p in truth.items():
            w.writerow([spk, p["gender"], int(p["age"])])

    # True parameters on comparable scales, then a fixed random linear map.
    P = np.array([[12 * np.log2(p["f0"]), p["vtl"], 100 * p["jitter"], p["noise"],
                   20 * np.log10(p["peak"])] for p in truth.values()])
    P = (P - P.mean(axis=0)) / P.std(axis=0)
    A = rng.standard_normal((P.shape[1], dim))
    g = np.array([1.0 if p["gender"] == "male" else -1.0 for p in truth.values()])
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    offset = 3.0 * rng.standard_normal(dim)
    E = (offset + P @ A + gender_strength * g[:, None] * direction
         + embedding_noise * rng.standard_normal((n_speakers, dim)))
    emb = root / "embeddings.csv"
    save_embeddings_csv(emb, [Embedding(v, spk) for spk, v in zip(truth, E)])
    return Cohort(root, tuple(wavs), meta, emb, truth)
