"""Interpretable acoustic descriptors and the statistics that relate them to
speaker-embedding space."""

from .audio_io import AudioClip, chunk_min_duration, frame_signal, load_wav, resample_to_16k, write_wav
from .embedding import (
    Embedding,
    PcaModel,
    cosine_distance,
    interspeaker_stats,
    load_embeddings,
    mean_embedding,
    pca_fit,
    pca_project,
    pca_quality_table,
    pca_reconstruct,
)
from .formants import estimate_formants, tube_fit_length, vtlen
from .pitch import EpochTrack, fx_iqr, fx_median, ppq, track_pitch
from .profile import (
    DESCRIPTORS,
    AcousticProfile,
    SpeakerRecord,
    aggregate_speaker,
    analyze_recording,
    fit_normalizer,
)
from .spectral import gne, level_db, spectral_slope

__version__ = "0.1.0"
