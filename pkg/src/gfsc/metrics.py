"""Clustering metrics (accuracy, NMI, purity) and a seeded k-means."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError, MetricError

KMEANS_MAX_ITER = 300


def contingency(pred, truth) -> np.ndarray:
    """Counts ``C[i, j]`` of samples in predicted cluster i and true class j."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise MetricError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise MetricError("need at least one sample")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    C = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(C, (pi.ravel(), ti.ravel()), 1)
    return C


def accuracy(pred, truth) -> float:
    """Best one-to-one cluster/class matching, as a fraction of samples."""
    C = contingency(pred, truth)
    m = max(C.shape)
    padded = np.zeros((m, m), dtype=np.int64)
    padded[:C.shape[0], :C.shape[1]] = C
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / C.sum()


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of entropies.

    Two single-cluster partitions score 1; if exactly one partition has
    zero entropy the score is 0.
    """
    C = contingency(pred, truth)
    n = int(C.sum())
    a = C.sum(axis=1)
    b = C.sum(axis=0)
    ha, hb = _entropy(a, n), _entropy(b, n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    nz = C > 0
    pij = C[nz] / n
    outer = np.outer(a, b)[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    return float(np.clip(mi / np.sqrt(ha * hb), 0.0, 1.0))


def purity(pred, truth) -> float:
    C = contingency(pred, truth)
    return float(C.max(axis=1).sum()) / C.sum()


def evaluate(pred, truth) -> dict:
    return {"acc": accuracy(pred, truth), "nmi": nmi(pred, truth),
            "purity": purity(pred, truth)}


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int


def _sq_dists(X, centers):
    d = (np.einsum("ij,ij->i", X, X)[:, None]
         - 2.0 * X @ centers.T
         + np.einsum("ij,ij->i", centers, centers)[None, :])
    return np.maximum(d, 0.0)


def _plusplus(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[c] = X[idx]
        closest = np.minimum(closest, _sq_dists(X, centers[c:c + 1]).ravel())
    return centers


def _lloyd(X, centers, max_iter):
    k = centers.shape[0]
    prev = None
    for it in range(1, max_iter + 1):
        assign = np.argmin(_sq_dists(X, centers), axis=1)
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        labels = assign.copy()
        counts = np.bincount(labels, minlength=k)
        centers = np.zeros_like(centers)
        np.add.at(centers, labels, X)
        nonempty = counts > 0
        centers[nonempty] /= counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            # reseed an empty cluster at the point worst served by its centroid
            resid = np.einsum("ij,ij->i", X - centers[labels], X - centers[labels])
            far = int(np.argmax(resid))
            old = labels[far]
            labels[far] = c
            centers[c] = X[far]
            members = labels == old
            if members.any():
                centers[old] = X[members].mean(axis=0)
    d = _sq_dists(X, centers)
    assign = np.argmin(d, axis=1)
    inertia = float(d[np.arange(X.shape[0]), assign].sum())
    return assign, centers, inertia, it


def kmeans_fit(points, k: int, seed: int = 0, restarts: int = 20,
               max_iter: int = KMEANS_MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds, best of ``restarts`` runs.

    Restart ``r`` draws from the ``r``-th child of ``SeedSequence(seed)``;
    ties in inertia go to the lowest restart index.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k > n:
        raise InputError(f"k={k} exceeds the number of points n={n}")
    if k < 1 or restarts < 1:
        raise InputError("k and restarts must be positive")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, centers, inertia, it = _lloyd(X, _plusplus(X, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centers, inertia, it)
    return best


def kmeans(points, k: int, seed: int = 0, restarts: int = 20) -> np.ndarray:
    return kmeans_fit(points, k, seed=seed, restarts=restarts).labels
