"""Multilayer perceptron regression from descriptors to embeddings."""

from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, InsufficientDataError


@dataclass(eq=False)
class MlpRegressor:
    """ReLU hidden layers, identity output, squared-error loss."""

    layer_sizes: tuple
    weights: list
    biases: list

    def __post_init__(self):
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_sizes[i], self.layer_sizes[i + 1])
            if W.shape != expect or b.shape != (expect[1],):
                raise ValueError(f"layer {i} has shape {W.shape}, expected {expect}")

    @classmethod
    def initialize(cls, layer_sizes, seed=0):
        """Glorot-uniform weights and biases."""
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, fan_out))
        return cls(tuple(layer_sizes), weights, biases)

    def copy(self):
        return MlpRegressor(self.layer_sizes, [w.copy() for w in self.weights],
                            [b.copy() for b in self.biases])

    def _forward(self, X):
        acts = [X]
        h = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return acts

    def predict(self, X):
        return self._forward(np.asarray(X, dtype=float))[-1]

    def loss(self, X, Y):
        d = self.predict(X) - Y
        return 0.5 * float(np.mean(d * d))

    def gradients(self, X, Y):
        """Loss and its gradients with respect to every weight and bias."""
        acts = self._forward(X)
        diff = acts[-1] - Y
        loss = 0.5 * float(np.mean(diff * diff))
        delta = diff / diff.size
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        return loss, gw, gb


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple = (32, 128)
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def mlp_train(X, Y, seed=0, epochs=None, learning_rate=None, config=None, min_rows=100):
    """Fit an MLP with mini-batch Adam; deterministic given ``seed``."""
    cfg = config or MlpConfig()
    epochs = cfg.epochs if epochs is None else epochs
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] < min_rows:
        raise InsufficientDataError(f"{X.shape[0]} rows for MLP training (need {min_rows})")
    sizes = (X.shape[1],) + tuple(cfg.hidden) + (Y.shape[1],)
    model = MlpRegressor.initialize(sizes, seed)
    rng = np.random.default_rng(seed)
    params = model.weights + model.biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    t = 0
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, gw, gb = model.gradients(X[idx], Y[idx])
            if not np.isfinite(loss):
                raise DivergenceError("non-finite training loss; lower the learning rate")
            t += 1
            a = lr * np.sqrt(1 - cfg.beta2 ** t) / (1 - cfg.beta1 ** t)
            for p, g, mi, vi in zip(params, gw + gb, m, v):
                mi *= cfg.beta1
                mi += (1 - cfg.beta1) * g
                vi *= cfg.beta2
                vi += (1 - cfg.beta2) * g * g
                p -= a * mi / (np.sqrt(vi) + cfg.eps)
    return model


def row_cosine_distances(A, B):
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    denom = np.where((na > 0) & (nb > 0), na * nb, 1.0)
    return np.where((na > 0) & (nb > 0), 1.0 - np.einsum("ij,ij->i", A, B) / denom, 1.0)


def fold_assignment(n, folds, seed):
    """Balanced seeded folds: sizes differ by at most one."""
    perm = np.random.default_rng(seed).permutation(n)
    out = np.empty(n, dtype=int)
    out[perm] = np.arange(n) % folds
    return out


def mlp_eval_cv(X, Y, folds=5, seed=0, config=None, epochs=None, learning_rate=None):
    """K-fold cross-validated mean cosine distance of MLP predictions.

    Fold ``f`` trains with seed ``seed + f``. The null distance (predicting the
    training-fold mean embedding) is reported alongside for reference.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[0]
    if n < 5 * folds:
        raise InsufficientDataError(f"{n} rows for {folds}-fold CV")
    assign = fold_assignment(n, folds, seed)
    dist = np.empty(n)
    null = np.empty(n)
    per_fold, null_fold = [], []
    for f in range(folds):
        test = assign == f
        model = mlp_train(X[~test], Y[~test], seed=seed + f, config=config, epochs=epochs,
                          learning_rate=learning_rate, min_rows=min(100, int((~test).sum())))
        d = row_cosine_distances(model.predict(X[test]), Y[test])
        mean_y = np.broadcast_to(Y[~test].mean(axis=0), Y[test].shape)
        dn = row_cosine_distances(mean_y, Y[test])
        dist[test], null[test] = d, dn
        per_fold.append(float(d.mean()))
        null_fold.append(float(dn.mean()))
    return {
        "fold_mean_cosine_distance": per_fold,
        "mean_cosine_distance": float(dist.mean()),
        "fold_sizes": [int(np.sum(assign == f)) for f in range(folds)],
        "null_fold_mean_cosine_distance": null_fold,
        "null_mean_cosine_distance": float(null.mean()),
    }
