"""Gaussian mixtures by EM, cluster relabeling of gender, and bimodality."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import DegenerateError, InsufficientDataError, TieError

COV_FLOOR = 1e-6
_LOG2PI = np.log(2 * np.pi)


@dataclass(frozen=True, eq=False)
class GmmModel:
    k: int
    weights: np.ndarray
    means: np.ndarray  # (k, d)
    covariances: np.ndarray  # (k, d, d)
    log_likelihood: float
    n_iter: int = 0
    converged: bool = False
    history: tuple = field(default=(), repr=False)

    def log_joint(self, points):
        """``log(w_j) + log N(x | mu_j, Sigma_j)`` for each point and component."""
        X = np.asarray(points, dtype=float)
        if X.ndim == 1:
            X = X[:, None] if self.means.shape[1] == 1 else X[None, :]
        return _log_joint(X, self.weights, self.means, self.covariances)

    def posteriors(self, points):
        lj = self.log_joint(points)
        return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))

    def predict(self, points):
        """Most probable component; exact ties resolve to the lower index."""
        return np.argmax(self.log_joint(points), axis=1)


def _log_joint(X, weights, means, covs):
    n, d = X.shape
    out = np.empty((n, weights.size))
    for j in range(weights.size):
        L = np.linalg.cholesky(covs[j])
        z = np.linalg.solve(L, (X - means[j]).T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        out[:, j] = np.log(weights[j]) - 0.5 * (d * _LOG2PI + logdet + np.sum(z * z, axis=0))
    return out


def _floor_cov(c):
    c = 0.5 * (c + c.T)
    idx = np.diag_indices_from(c)
    c[idx] = np.maximum(c[idx], COV_FLOOR)
    try:
        np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        c[idx] += COV_FLOOR
    return c


def _kmeans_pp(X, k, rng):
    """k-means++ seeding of ``k`` centers."""
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min([np.sum((X - c) ** 2, axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(n)])
        else:
            centers.append(X[rng.choice(n, p=d2 / total)])
    return np.array(centers)


def _m_step(X, resp):
    nk = resp.sum(axis=0)
    nk = np.maximum(nk, 1e-12)
    weights = nk / nk.sum()
    means = (resp.T @ X) / nk[:, None]
    covs = np.empty((resp.shape[1], X.shape[1], X.shape[1]))
    for j in range(resp.shape[1]):
        D = X - means[j]
        covs[j] = _floor_cov((resp[:, j, None] * D).T @ D / nk[j])
    return weights, means, covs


def _em(X, k, rng, tol, max_iter):
    centers = _kmeans_pp(X, k, rng)
    d2 = np.stack([np.sum((X - c) ** 2, axis=1) for c in centers], axis=1)
    resp = np.zeros((X.shape[0], k))
    resp[np.arange(X.shape[0]), np.argmin(d2, axis=1)] = 1.0
    weights, means, covs = _m_step(X, resp)
    history = []
    converged = False
    for it in range(1, max_iter + 1):
        lj = _log_joint(X, weights, means, covs)
        norm = logsumexp(lj, axis=1, keepdims=True)
        ll = float(norm.sum())
        if history:
            # EM never decreases the likelihood beyond rounding.
            assert ll >= history[-1] - 1e-8 * max(1.0, abs(history[-1])), "EM likelihood decreased"
        history.append(ll)
        if len(history) > 1 and ll - history[-2] < tol:
            converged = True
            break
        resp = np.exp(lj - norm)
        weights, means, covs = _m_step(X, resp)
    return GmmModel(k, weights, means, covs, history[-1], it, converged, tuple(history))


def gmm_fit(points, k=2, seed=0, restarts=5, tol=1e-7, max_iter=500):
    """Fit a ``k``-component full-covariance Gaussian mixture.

    Each restart is seeded with k-means++ from ``seed + restart``; the fit with
    the highest log-likelihood is returned.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 10 * k:
        raise InsufficientDataError(f"{n} points for {k} components (need {10 * k})")
    if np.all(np.ptp(X, axis=0) == 0):
        raise DegenerateError("all points are identical")
    best = None
    for r in range(restarts):
        model = _em(X, k, np.random.default_rng(seed + r), tol, max_iter)
        if best is None or model.log_likelihood > best.log_likelihood:
            best = model
    return best


GENDERS = ("male", "female")


def relabel_by_cluster(gmm, points, metadata_labels):
    """Assign points to components and name the components male/female.

    The naming that maximizes agreement with the metadata labels is chosen
    (for two components this is the majority vote). Points with unknown
    metadata do not count toward agreement.
    """
    if gmm.k != 2:
        raise ValueError("relabeling needs a two-component mixture")
    assign = gmm.predict(points)
    labels = np.asarray(metadata_labels, dtype=object)
    known = np.isin(labels, GENDERS)
    scores = []
    for naming in (GENDERS, GENDERS[::-1]):
        named = np.array(naming, dtype=object)[assign]
        scores.append(int(np.sum(named[known] == labels[known])))
    if scores[0] == scores[1]:
        raise TieError("both component namings agree equally with the metadata",
                       namings=[dict(enumerate(GENDERS)), dict(enumerate(GENDERS[::-1]))])
    naming = GENDERS if scores[0] > scores[1] else GENDERS[::-1]
    relabeled = np.array(naming, dtype=object)[assign]
    n_known = int(known.sum())
    return {
        "assignments": assign,
        "component_names": dict(enumerate(naming)),
        "agreement_percent": 100.0 * max(scores) / n_known if n_known else float("nan"),
        "relabeled": relabeled,
    }


def ashman_d(mu1, mu2, var1, var2):
    denom = np.sqrt(var1 + var2)
    if denom == 0:
        return 0.0 if mu1 == mu2 else float("inf")
    return float(np.sqrt(2.0) * abs(mu1 - mu2) / denom)


def bimodality_score(values, seed=0, threshold=2.0, min_weight=0.1, restarts=5):
    """Ashman's D of a two-component 1-D mixture fit.

    ``bimodal`` requires ``D > threshold`` and both components to carry at
    least ``min_weight`` of the mass; maximum-likelihood fits to unimodal data
    often park a tiny component in one tail, which inflates D on its own.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 50:
        raise InsufficientDataError(f"{v.size} values for bimodality (need 50)")
    g = gmm_fit(v[:, None], k=2, seed=seed, restarts=restarts)
    d = ashman_d(g.means[0, 0], g.means[1, 0], g.covariances[0, 0, 0], g.covariances[1, 0, 0])
    bimodal = d > threshold and float(g.weights.min()) >= min_weight
    return {"ashman_d": d, "bimodal": bool(bimodal), "min_weight": float(g.weights.min()),
            "model": g}
