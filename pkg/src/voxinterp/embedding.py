"""Speaker embeddings: file formats, cosine statistics and PCA."""

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, FormatError, RangeError, ZeroVectorError

MAGIC = b"VXEB"
VERSION = 1
PERCENTILES = (1, 5, 50, 95, 99)


@dataclass(frozen=True, eq=False)
class Embedding:
    vector: np.ndarray
    owner_id: str = ""

    def __post_init__(self):
        v = np.array(self.vector, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding components must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self):
        return self.vector.size


def _as_vector(x):
    return x.vector if isinstance(x, Embedding) else np.asarray(x, dtype=float)


# --- file formats -------------------------------------------------------------

def load_embeddings(path):
    """Read embeddings from CSV (``owner_id,v0,...``) or the binary VXEB format."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return _load_binary(path)
    return _load_csv(path)


def _load_csv(path):
    out = []
    dim = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty embedding file") from None
        if not header or header[0].strip() != "owner_id":
            raise FormatError(f"{path}:1: expected header 'owner_id,v0,v1,...'")
        dim = len(header) - 1
        if dim < 2:
            raise FormatError(f"{path}:1: embeddings need at least 2 components")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) - 1 != dim:
                raise FormatError(f"{path}:{line}: expected {dim} values, got {len(row) - 1}")
            try:
                vals = np.array([float(c) for c in row[1:]])
            except ValueError:
                raise FormatError(f"{path}:{line}: non-numeric value") from None
            if not np.all(np.isfinite(vals)):
                raise FormatError(f"{path}:{line}: non-finite value")
            out.append(Embedding(vals, row[0]))
    return out


def _load_binary(path):
    raw = path.read_bytes()
    if len(raw) < 16:
        raise FormatError(f"{path}: truncated VXEB header")
    _, version, dim, n = struct.unpack("<4sIII", raw[:16])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported VXEB version {version}")
    pos = 16
    out = []
    for i in range(n):
        if pos + 2 > len(raw):
            raise FormatError(f"{path}: truncated at record {i}")
        (id_len,) = struct.unpack("<H", raw[pos:pos + 2])
        pos += 2
        end = pos + id_len + 4 * dim
        if end > len(raw):
            raise FormatError(f"{path}: truncated at record {i}")
        owner = raw[pos:pos + id_len].decode("utf-8")
        vals = np.frombuffer(raw[pos + id_len:end], dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(vals)):
            raise FormatError(f"{path}: non-finite value in record {i}")
        out.append(Embedding(vals, owner))
        pos = end
    return out


def _check_dims(embeddings):
    dims = {e.dim for e in embeddings}
    if len(dims) > 1:
        raise FormatError(f"inconsistent embedding dimensions {sorted(dims)}")
    return dims.pop() if dims else 0


def save_embeddings_csv(path, embeddings):
    dim = _check_dims(embeddings)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["owner_id"] + [f"v{i}" for i in range(dim)])
        for e in embeddings:
            w.writerow([e.owner_id] + [repr(float(v)) for v in e.vector])


def save_embeddings_binary(path, embeddings):
    dim = _check_dims(embeddings)
    parts = [struct.pack("<4sIII", MAGIC, VERSION, dim, len(embeddings))]
    for e in embeddings:
        owner = e.owner_id.encode("utf-8")
        parts.append(struct.pack("<H", len(owner)) + owner + e.vector.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


# --- statistics ---------------------------------------------------------------

def mean_embedding(group, owner_id=None):
    group = list(group)
    if not group:
        raise EmptyInputError("cannot average an empty embedding group")
    if owner_id is None:
        owner_id = group[0].owner_id if isinstance(group[0], Embedding) else ""
    return Embedding(np.mean([_as_vector(g) for g in group], axis=0), owner_id)


def group_by_owner(embeddings):
    """Mean embedding per owner id, in order of first appearance."""
    groups = {}
    for e in embeddings:
        groups.setdefault(e.owner_id, []).append(e)
    return [mean_embedding(g, owner) for owner, g in groups.items()]


def cosine_distance(a, b):
    a, b = _as_vector(a), _as_vector(b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVectorError("cosine distance undefined for a zero vector")
    return float(1.0 - np.dot(a, b) / (na * nb))


def _row_cosine_distances(A, B):
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ZeroVectorError("cosine distance undefined for a zero vector")
    return 1.0 - np.einsum("ij,ij->i", A, B) / (na * nb)


def pairwise_cosine_distances(X):
    """Condensed vector of the N(N-1)/2 pairwise cosine distances between rows."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ZeroVectorError("cosine distance undefined for a zero vector")
    U = X / norms[:, None]
    iu = np.triu_indices(X.shape[0], k=1)
    return 1.0 - (U @ U.T)[iu]


def interspeaker_stats(means):
    """Mean and selected percentiles of all pairwise speaker cosine distances."""
    X = np.array([_as_vector(m) for m in means], dtype=float)
    if X.shape[0] < 2:
        raise EmptyInputError("need at least two speakers")
    d = pairwise_cosine_distances(X)
    return {
        "n_speakers": int(X.shape[0]),
        "n_pairs": int(d.size),
        "mean": float(d.mean()),
        "percentiles": {str(p): float(v) for p, v in zip(PERCENTILES, np.percentile(d, PERCENTILES))},
    }


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted principal axes of centered data (no per-coordinate scaling)."""

    mean: np.ndarray
    components: np.ndarray  # (K, D), rows orthonormal
    eigenvalues: np.ndarray
    total_variance: float
    n_samples: int = 0

    @property
    def n_components(self):
        return self.components.shape[0]

    def explained_percent(self, k):
        return 100.0 * float(np.sum(self.eigenvalues[:k])) / self.total_variance


def pca_fit(matrix):
    """Principal components of the rows of ``matrix`` via a thin SVD.

    Covariance is normalized by ``N - 1``. Each component is signed so that its
    largest-magnitude coordinate is positive.
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise EmptyInputError("PCA needs at least two rows")
    if X.shape[1] < 2:
        raise ValueError("PCA needs at least two columns")
    n = X.shape[0]
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    eig = s ** 2 / (n - 1)
    big = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), big])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]
    total = float(np.sum(Xc * Xc) / (n - 1))
    return PcaModel(mean, vt, eig, total, n)


def _check_k(model, k):
    if not 1 <= k <= model.n_components:
        raise RangeError(f"k={k} outside 1..{model.n_components}")


def pca_project(model, x, k):
    _check_k(model, k)
    X = np.asarray(_as_vector(x) if isinstance(x, Embedding) else x, dtype=float)
    return (X - model.mean) @ model.components[:k].T


def pca_reconstruct(model, scores, k):
    _check_k(model, k)
    scores = np.asarray(scores, dtype=float)
    return model.mean + scores[..., :k] @ model.components[:k]


def pca_quality_table(model, data, k_max):
    """Rows of ``{k, variance_percent, mean_cosine_distance}`` for ``k = 1..k_max``."""
    _check_k(model, k_max)
    X = np.asarray(data, dtype=float)
    scores = pca_project(model, X, k_max)
    rows = []
    for k in range(1, k_max + 1):
        recon = pca_reconstruct(model, scores[:, :k], k)
        rows.append({
            "k": k,
            "variance_percent": model.explained_percent(k),
            "mean_cosine_distance": float(np.mean(_row_cosine_distances(X, recon))),
        })
    return rows


def stack(embeddings):
    """``(ids, N x D array)`` from a sequence of embeddings."""
    embeddings = list(embeddings)
    _check_dims(embeddings)
    ids = [e.owner_id for e in embeddings]
    return ids, np.array([e.vector for e in embeddings], dtype=float)


__all__ = [
    "Embedding", "PcaModel", "load_embeddings", "save_embeddings_csv", "save_embeddings_binary",
    "mean_embedding", "group_by_owner", "cosine_distance", "interspeaker_stats",
    "pca_fit", "pca_project", "pca_reconstruct", "pca_quality_table", "stack",
]
