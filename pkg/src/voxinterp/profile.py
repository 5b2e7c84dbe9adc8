"""Per-recording acoustic profiles, per-speaker means and cohort normalization."""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio_io import ANALYSIS_RATE, resample_to_16k
from .errors import (
    EmptyInputError,
    FormatError,
    InsufficientDataError,
    VoxInterpError,
    ZeroVarianceError,
)
from .formants import FormantConfig, vtlen
from .pitch import PitchConfig, fx_iqr, fx_median, ppq, track_pitch
from .spectral import SpectralConfig, gne, level_db, spectral_slope

log = logging.getLogger(__name__)

DESCRIPTORS = ("fxmedian", "fxiqr", "ppq", "gne", "slope", "vtlen", "level", "stoi", "pesq")
ACOUSTIC = DESCRIPTORS[:7]
EXTERNAL = ("stoi", "pesq")

# Unit ranges from the descriptor table; None means unbounded on that side.
_RANGES = {
    "fxmedian": (None, None),
    "fxiqr": (0.0, None),
    "ppq": (0.0, None),
    "gne": (0.0, 1.0),
    "slope": (None, None),
    "vtlen": (0.0, None),
    "level": (None, None),
    "stoi": (0.0, 1.0),
    "pesq": (1.0, 5.0),
}

TRANSFORMS = {
    "fxmedian": "identity",
    "fxiqr": "log10",
    "ppq": "log10",
    "gne": "logit",
    "slope": "identity",
    "vtlen": "identity",
    "level": "identity",
    "stoi": "logit",
    "pesq": "identity",
}
LOGIT_CLAMP = 1e-4
LOG_FLOOR = 1e-6


@dataclass(frozen=True)
class AcousticProfile:
    """The nine descriptors; ``None`` marks an absent value.

    ``status`` maps each field to ``"ok"`` or the name of the condition that
    left it absent.
    """

    fxmedian: float = None
    fxiqr: float = None
    ppq: float = None
    gne: float = None
    slope: float = None
    vtlen: float = None
    level: float = None
    stoi: float = None
    pesq: float = None
    status: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in DESCRIPTORS:
            v = getattr(self, name)
            if v is None:
                continue
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            lo, hi = _RANGES[name]
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                raise ValueError(f"{name}={v} outside its unit range")
            object.__setattr__(self, name, v)

    def get(self, name):
        return getattr(self, name)

    def as_dict(self):
        return {name: getattr(self, name) for name in DESCRIPTORS}

    def present(self, names=DESCRIPTORS):
        return all(getattr(self, n) is not None for n in names)


@dataclass(frozen=True)
class SpeakerRecord:
    speaker_id: str
    gender_label: str = "unknown"
    age_years: float = None
    profiles: tuple = ()
    mean_profile: AcousticProfile = None

    def __post_init__(self):
        if self.gender_label not in ("male", "female", "unknown"):
            raise ValueError(f"gender label {self.gender_label!r} not in male/female/unknown")
        if self.age_years is not None and not self.age_years > 0:
            raise ValueError("age must be positive")
        if self.mean_profile is None:
            if not self.profiles:
                raise EmptyInputError(f"speaker {self.speaker_id!r} has no profiles")
            object.__setattr__(self, "mean_profile", aggregate_speaker(self.profiles))


@dataclass(frozen=True)
class AnalysisConfig:
    pitch: PitchConfig = field(default_factory=PitchConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    formants: FormantConfig = field(default_factory=FormantConfig)


def _status_name(exc):
    name = type(exc).__name__
    return name[:-5] if name.endswith("Error") else name


def analyze_recording(clip, sidecar=None, config=None):
    """Compute the acoustic descriptors of one recording.

    Descriptors that cannot be measured are left absent with their status
    recording why; STOI and PESQ are copied from ``sidecar`` (a mapping with
    ``stoi``/``pesq`` keys) when given.
    """
    cfg = config or AnalysisConfig()
    if clip.sample_rate != ANALYSIS_RATE:
        clip = resample_to_16k(clip)
    values, status = {}, {}

    def attempt(name, fn):
        try:
            values[name] = fn()
            status[name] = "ok"
        except VoxInterpError as exc:
            status[name] = _status_name(exc)

    attempt("level", lambda: level_db(clip))
    try:
        track = track_pitch(clip, cfg.pitch)
    except VoxInterpError as exc:
        track = None
        for name in ACOUSTIC[:6]:
            status[name] = _status_name(exc)
    if track is not None:
        attempt("fxmedian", lambda: fx_median(track))
        attempt("fxiqr", lambda: fx_iqr(track))
        attempt("ppq", lambda: ppq(track, cfg.pitch.ppq_half_width))
        attempt("gne", lambda: gne(clip, track, cfg.spectral))
        attempt("slope", lambda: spectral_slope(clip, track, cfg.spectral))
        attempt("vtlen", lambda: vtlen(clip, track, cfg.formants))

    for name in EXTERNAL:
        v = None if sidecar is None else sidecar.get(name)
        if v is None or (isinstance(v, float) and math.isnan(v)):
            status[name] = "Absent"
        else:
            values[name] = float(v)
            status[name] = "ok"
    return AcousticProfile(**values, status=status)


def aggregate_speaker(profiles):
    """Field-wise mean over the segments where each field is present."""
    profiles = list(profiles)
    if not profiles:
        raise EmptyInputError("no profiles to aggregate")
    values = {}
    for name in DESCRIPTORS:
        present = [p.get(name) for p in profiles if p.get(name) is not None]
        if present:
            values[name] = math.fsum(present) / len(present)
    status = {n: ("ok" if n in values else "Absent") for n in DESCRIPTORS}
    return AcousticProfile(**values, status=status)


def _forward(kind, v):
    v = np.asarray(v, dtype=float)
    if kind == "identity":
        return v
    if kind == "log10":
        return np.log10(np.maximum(v, LOG_FLOOR))
    if kind == "logit":
        p = np.clip(v, LOGIT_CLAMP, 1 - LOGIT_CLAMP)
        return np.log(p / (1 - p))
    raise ValueError(f"unknown transform {kind!r}")


@dataclass(frozen=True, eq=False)
class Normalizer:
    """Fitted per-descriptor transform followed by a z-score."""

    columns: tuple
    transforms: dict
    means: np.ndarray
    sds: np.ndarray

    def transform_values(self, raw):
        raw = np.atleast_2d(np.asarray(raw, dtype=float))
        t = np.column_stack([_forward(self.transforms[c], raw[:, j])
                             for j, c in enumerate(self.columns)])
        return (t - self.means) / self.sds

    def apply(self, records):
        rows, ids, dropped = _collect(records, self.columns)
        return NormalizedMatrix(
            rows=self.transform_values(rows) if rows.size else rows,
            speaker_ids=ids, columns=self.columns,
            transform_spec={c: self.transforms[c] for c in self.columns},
            means=self.means, sds=self.sds, dropped=dropped)

    def metadata(self):
        return {
            "columns": list(self.columns),
            "transforms": {c: self.transforms[c] for c in self.columns},
            "means": [float(m) for m in self.means],
            "sds": [float(s) for s in self.sds],
            "logit_clamp": LOGIT_CLAMP,
        }


@dataclass(frozen=True, eq=False)
class NormalizedMatrix:
    rows: np.ndarray
    speaker_ids: tuple
    columns: tuple
    transform_spec: dict
    means: np.ndarray
    sds: np.ndarray
    dropped: tuple = ()


def _profile_of(record):
    return record.mean_profile if isinstance(record, SpeakerRecord) else record[1]


def _id_of(record):
    return record.speaker_id if isinstance(record, SpeakerRecord) else record[0]


def _collect(records, columns):
    rows, ids, dropped = [], [], []
    for r in records:
        prof = _profile_of(r)
        if prof.present(columns):
            rows.append([prof.get(c) for c in columns])
            ids.append(_id_of(r))
        else:
            dropped.append(_id_of(r))
    arr = np.asarray(rows, dtype=float).reshape(len(rows), len(columns))
    return arr, tuple(ids), tuple(dropped)


def fit_normalizer(records, columns=DESCRIPTORS, min_speakers=10):
    """Fit descriptor transforms and z-scores over a speaker cohort.

    ``records`` are :class:`SpeakerRecord` objects or ``(speaker_id, profile)``
    pairs. Speakers missing any modeled column are dropped and listed in
    ``NormalizedMatrix.dropped``.

    Returns
    -------
    matrix : NormalizedMatrix
    normalizer : Normalizer
    """
    columns = tuple(columns)
    records = list(records)
    rows, ids, dropped = _collect(records, columns)
    if dropped:
        log.info("dropped %d speakers missing modeled descriptors", len(dropped))
    if rows.shape[0] < min_speakers:
        raise InsufficientDataError(
            f"{rows.shape[0]} complete speakers; need at least {min_speakers}")
    transforms = {c: TRANSFORMS[c] for c in columns}
    t = np.column_stack([_forward(transforms[c], rows[:, j]) for j, c in enumerate(columns)])
    means = t.mean(axis=0)
    sds = t.std(axis=0, ddof=1)
    for j, c in enumerate(columns):
        if not sds[j] > 1e-12 * max(1.0, abs(means[j])):
            raise ZeroVarianceError(c)
    z = (t - means) / sds
    norm = Normalizer(columns, transforms, means, sds)
    matrix = NormalizedMatrix(z, ids, columns, dict(transforms), means, sds, dropped)
    return matrix, norm


# --- file formats -------------------------------------------------------------

FEATURE_HEADER = ("speaker_id", "segment_id") + DESCRIPTORS
SPEAKER_HEADER = ("speaker_id", "gender", "age", "n_segments") + DESCRIPTORS


def _fmt(v):
    return "" if v is None else repr(float(v))


def _num(cell, path, line):
    cell = cell.strip()
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise FormatError(f"{path}:{line}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"{path}:{line}: non-finite value {cell!r}")
    return v


def _rows(path, header):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        got = [h.strip() for h in got]
        if tuple(got[:len(header)]) != tuple(header):
            raise FormatError(f"{path}: expected header {','.join(header)}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(got):
                raise FormatError(f"{path}:{line}: expected {len(got)} cells, got {len(row)}")
            yield line, dict(zip(got, row))


def write_features(path, rows):
    """Write ``(speaker_id, segment_id, AcousticProfile)`` triples."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_HEADER)
        for spk, seg, prof in rows:
            w.writerow([spk, seg] + [_fmt(prof.get(n)) for n in DESCRIPTORS])


def read_features(path):
    out = []
    for line, row in _rows(path, FEATURE_HEADER):
        try:
            prof = AcousticProfile(**{n: _num(row[n], path, line) for n in DESCRIPTORS})
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}:{line}: {exc}") from None
        out.append((row["speaker_id"], row["segment_id"], prof))
    return out


def read_metadata(path):
    """``speaker_id -> (gender, age)``; duplicate speaker ids are an error."""
    meta = {}
    for line, row in _rows(path, ("speaker_id", "gender", "age")):
        spk = row["speaker_id"]
        if spk in meta:
            raise FormatError(f"{path}:{line}: duplicate speaker_id {spk!r}")
        gender = row["gender"].strip().lower() or "unknown"
        if gender in ("m", "f"):
            gender = {"m": "male", "f": "female"}[gender]
        if gender not in ("male", "female", "unknown"):
            raise FormatError(f"{path}:{line}: gender {gender!r} not male/female/unknown")
        meta[spk] = (gender, _num(row["age"], path, line))
    return meta


def read_sidecar(path):
    """``segment_id -> {"stoi": ..., "pesq": ...}``."""
    out = {}
    for line, row in _rows(path, ("segment_id", "stoi", "pesq")):
        out[row["segment_id"]] = {"stoi": _num(row["stoi"], path, line),
                                  "pesq": _num(row["pesq"], path, line)}
    return out


def write_speakers(path, records):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPEAKER_HEADER)
        for r in records:
            w.writerow([r.speaker_id, r.gender_label, _fmt(r.age_years), len(r.profiles)]
                       + [_fmt(r.mean_profile.get(n)) for n in DESCRIPTORS])


def read_speakers(path):
    out = []
    for line, row in _rows(path, SPEAKER_HEADER):
        prof = AcousticProfile(**{n: _num(row[n], path, line) for n in DESCRIPTORS})
        n_seg = int(row["n_segments"])
        out.append(SpeakerRecord(row["speaker_id"], row["gender"] or "unknown",
                                 _num(row["age"], path, line), (prof,) * n_seg, prof))
    return out


def build_speakers(features, metadata):
    """Join segment features with metadata into :class:`SpeakerRecord` objects.

    Returns the records (in first-appearance order) and the list of speaker
    ids that had no metadata row.
    """
    grouped = {}
    for spk, _, prof in features:
        grouped.setdefault(spk, []).append(prof)
    records, missing = [], []
    for spk, profs in grouped.items():
        if spk in metadata:
            gender, age = metadata[spk]
        else:
            gender, age = "unknown", None
            missing.append(spk)
        records.append(SpeakerRecord(spk, gender, age, tuple(profs)))
    return records, missing


__all__ = [
    "DESCRIPTORS", "AcousticProfile", "SpeakerRecord", "AnalysisConfig", "Normalizer",
    "NormalizedMatrix", "analyze_recording", "aggregate_speaker", "fit_normalizer",
    "read_features", "write_features", "read_metadata", "read_sidecar",
    "read_speakers", "write_speakers", "build_speakers",
]
