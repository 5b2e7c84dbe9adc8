"""How well principal dimensions and embeddings carry speaker age."""

import numpy as np

from ..errors import DegenerateError, InsufficientDataError
from .glm import pearson_r, split_indices


def ridge_fit(X, y, lam=1.0):
    """Ridge weights on standardized columns of ``X`` with a free intercept.

    Returns ``(predict, weights)`` where ``predict`` maps raw rows to targets.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Z = (X - mu) / sd
    y0 = y.mean()
    w = np.linalg.solve(Z.T @ Z + lam * np.eye(Z.shape[1]), Z.T @ (y - y0))

    def predict(Xn):
        return ((np.asarray(Xn, dtype=float) - mu) / sd) @ w + y0

    return predict, w


def age_report(pc_scores, embeddings, ages, seed=0, lam=1.0, heldout_fraction=0.2,
               min_speakers=50):
    """Per-PC Pearson correlation with age, and held-out ridge prediction of age."""
    S = np.asarray(pc_scores, dtype=float)
    E = np.asarray(embeddings, dtype=float)
    a = np.asarray(ages, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if a.size < min_speakers:
        raise InsufficientDataError(f"{a.size} speakers with age (need {min_speakers})")
    if S.shape[0] != a.size or E.shape[0] != a.size:
        raise ValueError("pc_scores, embeddings and ages must have matching rows")
    if np.ptp(a) == 0:
        raise DegenerateError("age column is constant")
    per_pc = [pearson_r(S[:, j], a) for j in range(S.shape[1])]
    tr, ho = split_indices(a.size, heldout_fraction, seed)
    predict, _ = ridge_fit(E[tr], a[tr], lam)
    return {
        "pc_age_r": per_pc,
        "max_abs_pc_age_r": float(np.max(np.abs(per_pc))),
        "heldout_r": pearson_r(predict(E[ho]), a[ho]),
        "n_train": int(tr.size),
        "n_heldout": int(ho.size),
    }
