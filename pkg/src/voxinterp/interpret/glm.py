"""Greedy forward selection of Gaussian linear models with held-out stopping."""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..errors import DegenerateError, InsufficientDataError, SingularError


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    intercept: float
    rss: float

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if self.coefficients.size == 0:
            return np.full(X.shape[0], self.intercept)
        return X @ self.coefficients + self.intercept


def ols_fit(X, y):
    """Least squares with an intercept."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if n <= p + 1:
        raise SingularError(f"{n} observations cannot fit {p} predictors plus intercept")
    A = np.column_stack([np.ones(n), X])
    sol, _, rank, sv = np.linalg.lstsq(A, y, rcond=None)
    if rank < p + 1 or sv[-1] <= sv[0] * 1e-12:
        raise SingularError("design matrix is rank deficient")
    resid = y - A @ sol
    return OlsFit(sol[1:], float(sol[0]), float(resid @ resid))


def lr_chisq_pvalue(rss_small, rss_big, n, df_added=1):
    """Upper-tail p-value of the likelihood-ratio statistic ``n ln(rss_small/rss_big)``."""
    if rss_small <= 0 or rss_big <= 0:
        raise DegenerateError("residual sums of squares must be positive")
    if n <= 2:
        raise DegenerateError("need more than two observations")
    stat = n * np.log(rss_small / rss_big)
    return float(stats.chi2.sf(max(stat, 0.0), df_added))


def pearson_r(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a @ a) * (b @ b))
    return float(a @ b / denom) if denom > 0 else 0.0


def rmse(pred, y):
    d = np.asarray(pred, dtype=float) - np.asarray(y, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Greedily selected linear model; ``selected`` is in order of addition."""

    selected: tuple
    coefficients: dict
    intercept: float
    train_rmse: float
    heldout_rmse: float
    heldout_corr: float
    path_heldout_rmse: tuple = ()
    heldout_index: np.ndarray = field(default=None, repr=False)
    heldout_pred: np.ndarray = field(default=None, repr=False)

    def predict(self, X, names):
        X = np.asarray(X, dtype=float)
        out = np.full(X.shape[0], self.intercept)
        for name in self.selected:
            out += self.coefficients[name] * X[:, list(names).index(name)]
        return out


def split_indices(n, heldout_fraction, seed):
    """Seeded train/held-out partition of ``range(n)``."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_hold = int(round(heldout_fraction * n))
    if n_hold < 2 or n - n_hold < 3:
        raise DegenerateError(f"split of {n} rows leaves {n_hold} held out")
    return np.sort(perm[n_hold:]), np.sort(perm[:n_hold])


def greedy_select(X, y, names=None, alpha=0.05, heldout_fraction=0.2, seed=0, split=None):
    """Forward selection: add the descriptor that most reduces training RSS.

    Growth stops when the candidate fails to strictly reduce held-out RMSE,
    or when the likelihood-ratio chi-square test of the addition gives
    ``p >= alpha``. Exact RSS ties go to the lowest column index.

    ``split`` optionally supplies ``(train_index, heldout_index)`` in place of
    the seeded partition.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(p))
    if len(names) != p:
        raise ValueError("names must match the number of columns")
    if n < 50 or p < 1:
        raise InsufficientDataError(f"greedy selection needs N >= 50 and p >= 1 (got {n}, {p})")
    if split is None:
        tr, ho = split_indices(n, heldout_fraction, seed)
    else:
        tr, ho = (np.sort(np.asarray(i, dtype=int)) for i in split)
        if ho.size < 2 or tr.size < 3:
            raise DegenerateError(f"split leaves {tr.size} training and {ho.size} held-out rows")
    Xtr, ytr, Xho, yho = X[tr], y[tr], X[ho], y[ho]
    if np.ptp(ytr) == 0:
        raise DegenerateError("target is constant on the training split")

    selected = []
    current = OlsFit(np.zeros(0), float(ytr.mean()), float(np.sum((ytr - ytr.mean()) ** 2)))
    cur_ho = rmse(current.predict(Xho[:, selected]), yho)
    path = [cur_ho]
    while len(selected) < p:
        best_j, best_fit = None, None
        for j in range(p):
            if j in selected:
                continue
            try:
                fit = ols_fit(Xtr[:, selected + [j]], ytr)
            except SingularError:
                continue
            if best_fit is None or fit.rss < best_fit.rss:
                best_j, best_fit = j, fit
        if best_fit is None:
            break
        ho_rmse = rmse(best_fit.predict(Xho[:, selected + [best_j]]), yho)
        if not ho_rmse < cur_ho:
            break
        if best_fit.rss <= 0:
            pval = 0.0
        else:
            pval = lr_chisq_pvalue(current.rss, best_fit.rss, tr.size, 1)
        if pval >= alpha:
            break
        selected.append(best_j)
        current, cur_ho = best_fit, ho_rmse
        path.append(ho_rmse)

    pred_ho = current.predict(Xho[:, selected])
    return LinearModel(
        selected=tuple(names[j] for j in selected),
        coefficients={names[j]: float(c) for j, c in zip(selected, current.coefficients)},
        intercept=current.intercept,
        train_rmse=float(np.sqrt(current.rss / tr.size)),
        heldout_rmse=cur_ho,
        heldout_corr=pearson_r(pred_ho, yho),
        path_heldout_rmse=tuple(path),
        heldout_index=ho,
        heldout_pred=pred_ho,
    )


def gendered_compare(X, y, cluster_labels, names=None, alpha=0.05, heldout_fraction=0.2,
                     seed=0, min_cluster=50):
    """Pooled versus per-cluster greedy models.

    One seeded split is drawn for the whole cohort and each cluster keeps its
    own share of it, so pooled and gendered models are scored on the same
    held-out rows. The gendered RMSE and correlation are computed on the union
    of the per-cluster held-out predictions. ``sign_table`` maps every descriptor
    chosen in all per-cluster models to its coefficient sign per cluster.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    labels = np.asarray(cluster_labels)
    clusters = sorted(set(labels.tolist()), key=str)
    for c in clusters:
        count = int(np.sum(labels == c))
        if count < min_cluster:
            raise InsufficientDataError(f"cluster {c!r} has {count} members (need {min_cluster})")

    tr, ho = split_indices(y.size, heldout_fraction, seed)
    pooled = greedy_select(X, y, names, alpha, split=(tr, ho))
    is_ho = np.zeros(y.size, dtype=bool)
    is_ho[ho] = True
    per = {}
    preds, truth = [], []
    for c in clusters:
        idx = np.flatnonzero(labels == c)
        local = (np.flatnonzero(~is_ho[idx]), np.flatnonzero(is_ho[idx]))
        model = greedy_select(X[idx], y[idx], names, alpha, split=local)
        per[c] = model
        preds.append(model.heldout_pred)
        truth.append(y[idx][model.heldout_index])
    preds = np.concatenate(preds)
    truth = np.concatenate(truth)

    common = [n for n in per[clusters[0]].selected
              if all(n in per[c].coefficients for c in clusters)]
    sign_table = {n: {c: ("up" if per[c].coefficients[n] > 0 else "down") for c in clusters}
                  for n in common}
    return {
        "pooled": {"rmse": pooled.heldout_rmse, "corr": pooled.heldout_corr},
        "gendered": {"rmse": rmse(preds, truth), "corr": pearson_r(preds, truth)},
        "pooled_model": pooled,
        "models": per,
        "sign_table": sign_table,
    }
