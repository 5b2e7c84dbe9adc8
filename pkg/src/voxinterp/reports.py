"""Deterministic CSV and JSON report writers and the PC-score file format."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import FormatError


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj):
    text = json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_csv(path, header=None):
    """Rows of a CSV as dicts; checks the header prefix when given."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if header is not None and tuple(got[:len(header)]) != tuple(header):
            raise FormatError(f"{path}: expected header starting {','.join(header)}")
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(got):
                raise FormatError(f"{path}:{line}: expected {len(got)} cells, got {len(row)}")
            rows.append(dict(zip(got, row)))
    return got, rows


# --- PC scores ----------------------------------------------------------------

def write_pc_scores(path, ids, scores):
    scores = np.asarray(scores, dtype=float)
    header = ["speaker_id"] + [f"pc{j + 1}" for j in range(scores.shape[1])]
    write_csv(path, header, ([sid] + list(row) for sid, row in zip(ids, scores)))


def read_pc_scores(path):
    """``(speaker_ids, N x k array)`` from a ``speaker_id,pc1,...`` file."""
    header, rows = read_csv(path, ("speaker_id",))
    cols = header[1:]
    if not cols or cols != [f"pc{j + 1}" for j in range(len(cols))]:
        raise FormatError(f"{path}: expected columns pc1..pck after speaker_id")
    ids, data = [], []
    for line, row in enumerate(rows, start=2):
        try:
            vals = [float(row[c]) for c in cols]
        except ValueError:
            raise FormatError(f"{path}:{line}: non-numeric PC score") from None
        if not all(math.isfinite(v) for v in vals):
            raise FormatError(f"{path}:{line}: non-finite PC score")
        ids.append(row["speaker_id"])
        data.append(vals)
    if len(set(ids)) != len(ids):
        raise FormatError(f"{path}: duplicate speaker_id")
    return ids, np.asarray(data, dtype=float).reshape(len(ids), len(cols))
