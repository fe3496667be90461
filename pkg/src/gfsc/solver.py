"""Alternating solver for joint graph learning, fusion and spectral clustering.

One outer iteration performs, in order:

1. per-view graph update (closed form) for every view,
2. projection of each view graph onto the nonnegative orthant,
3. consensus update (closed form, column-wise),
4. embedding update (k smallest Laplacian eigenvectors),
5. inverse-distance view-weight update.

The loop stops after ``max_iter`` iterations or once the relative change of
the consensus graph drops below ``tol``.
"""
from __future__ import annotations

import logging
import time
from typing import Sequence

import numpy as np

from . import metrics as _metrics
from .errors import DimensionError
from .fusion import compute_weights, fusion_term, update_consensus, average_graph
from .graph import ViewGram, learn_single_view_graph, update_view_graph
from .spectral import build_laplacian, normalize_rows, spectral_clustering, update_embedding
from .types import (ClusteringResult, ConsensusGraph, Hyperparams, IterationRecord,
                    MultiViewDataset, SolverTrace, SpectralEmbedding, ViewGraph,
                    ViewWeights)

log = logging.getLogger(__name__)

KMEANS_RESTARTS = 20
INIT_MODES = ("random", "warm")


def _mat(g):
    if isinstance(g, (ViewGraph, ConsensusGraph)):
        return g.matrix
    return np.asarray(g, dtype=float)


def structure_term(S, F, clipped: bool = True) -> float:
    """``Tr(F^T L F)``.

    With ``clipped`` the Laplacian comes from the symmetric nonnegative copy
    of ``S`` (the one the embedding step uses); otherwise it is evaluated on
    the raw matrix as ``1/2 sum_ij ||F_i - F_j||^2 s_ij``, which is what the
    consensus step minimizes.
    """
    F = F.F if isinstance(F, SpectralEmbedding) else np.asarray(F, dtype=float)
    if clipped:
        S = S if isinstance(S, ConsensusGraph) else ConsensusGraph(S)
        L = build_laplacian(S).L
        return float(np.sum(F * (L @ F)))
    p = SpectralEmbedding(F).pairwise_sq_distances()
    return float(0.5 * np.sum(p * _mat(S)))


def objective(Zs: Sequence, S, F, Xs: Sequence, params: Hyperparams, w,
              clipped: bool = True) -> float:
    """Full objective: reconstruction + ridge + weighted fusion + structure."""
    w = w.w if isinstance(w, ViewWeights) else np.asarray(w, dtype=float)
    if not (len(Zs) == len(Xs) == w.size):
        raise DimensionError("graphs, views and weights disagree in count")
    total = 0.0
    for X, Z in zip(Xs, Zs):
        X = np.asarray(X, dtype=float)
        Z = _mat(Z)
        R = X - X @ Z
        total += np.sum(R * R) + params.alpha * np.sum(Z * Z)
    total += params.beta * fusion_term(Zs, S, w)
    if F is not None:
        total += params.gamma * structure_term(S, F, clipped=clipped)
    return float(total)


def relative_change(new, old) -> float:
    new, old = _mat(new), _mat(old)
    denom = np.linalg.norm(old)
    diff = np.linalg.norm(new - old)
    if denom == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return float(diff / denom)


def initialize(data: MultiViewDataset, params: Hyperparams, init: str = "random",
               grams=None):
    """Starting point ``(Zs, S, F, w)``.

    ``w`` is uniform. With ``init="random"`` the consensus is uniform on
    [0, 1]; ``init="warm"`` starts it at the mean of the uncoupled view
    graphs instead. ``F`` is an orthonormalized Gaussian matrix. Both draws
    come from ``params.seed``. The view graphs are the first coupled update
    from that starting point.
    """
    if init not in INIT_MODES:
        raise ValueError(f"init must be one of {INIT_MODES}, got {init!r}")
    n, t = data.n, data.t
    if params.k > n:
        raise DimensionError(f"k={params.k} exceeds n={n}")
    grams = [ViewGram(X) for X in data.views] if grams is None else grams
    rng = np.random.default_rng(params.seed)
    S_rand = rng.random((n, n))
    F0, _ = np.linalg.qr(rng.standard_normal((n, params.k)))
    if init == "warm":
        S = average_graph([learn_single_view_graph(X, params.alpha, G=G)
                           for X, G in zip(data.views, grams)])
    else:
        S = ConsensusGraph(S_rand)
    w = ViewWeights.uniform(t)
    Zs = [update_view_graph(X, S, params.alpha, params.beta, wv, view_index=v, G=G)
          for v, (X, G, wv) in enumerate(zip(data.views, grams, w.w))]
    return Zs, S, SpectralEmbedding(F0), w


def _attach_metrics(result: ClusteringResult, data: MultiViewDataset) -> ClusteringResult:
    if data.labels is not None:
        m = _metrics.evaluate(result.labels, data.labels)
        result.acc, result.nmi, result.purity = m["acc"], m["nmi"], m["purity"]
    return result


def _check_decrease(before, after, what, it):
    if after > before + 1e-9 * max(1.0, abs(before)):
        raise AssertionError(
            f"iteration {it}: {what} step increased the objective "
            f"from {before!r} to {after!r}")


def gfsc(data: MultiViewDataset, params: Hyperparams, *, init: str = "random",
         row_normalize: bool = False, restarts: int = KMEANS_RESTARTS,
         debug: bool = False, callback=None) -> ClusteringResult:
    """Run the joint solver and cluster the final embedding with k-means.

    Parameters
    ----------
    data : MultiViewDataset
        Normalized views.
    params : Hyperparams
    init : {"random", "warm"}
        Consensus initialization, see :func:`initialize`.
    row_normalize : bool
        Scale embedding rows to unit length before k-means.
    restarts : int
        k-means restarts.
    debug : bool
        Check after every block update that the objective did not increase
        (pre-projection view graphs, fixed weights).
    callback : callable, optional
        Called as ``callback(iteration, Zs, S, F, w)`` after each iteration.
    """
    Xs = data.views
    grams = [ViewGram(X) for X in Xs]
    Zs, S, F, w = initialize(data, params, init=init, grams=grams)
    trace = SolverTrace()
    for it in range(1, params.max_iter + 1):
        t0 = time.perf_counter()
        if it > 1 or debug:
            if debug:
                before = objective(Zs, S, F, Xs, params, w)
            raw = [update_view_graph(X, S, params.alpha, params.beta, wv,
                                     clip=False, view_index=v, G=G)
                   for v, (X, G, wv) in enumerate(zip(Xs, grams, w.w))]
            if debug and it > 1:
                _check_decrease(before, objective(raw, S, F, Xs, params, w), "graph", it)
            Zs = [ViewGraph(np.maximum(Z.matrix, 0.0), Z.view_index) for Z in raw]

        S_prev = S
        if debug:
            before = objective(Zs, S, F, Xs, params, w, clipped=False)
        S = update_consensus(Zs, w, F, params.beta, params.gamma)
        if debug:
            _check_decrease(before, objective(Zs, S, F, Xs, params, w, clipped=False),
                            "consensus", it)
            before = objective(Zs, S, F, Xs, params, w)
        F = update_embedding(build_laplacian(S), params.k)
        if debug:
            _check_decrease(before, objective(Zs, S, F, Xs, params, w), "embedding", it)
        w = compute_weights(Zs, S)

        rel = relative_change(S, S_prev)
        trace.append(IterationRecord(
            iteration=it, objective=objective(Zs, S, F, Xs, params, w),
            rel_change=rel, weights=[float(x) for x in w.w],
            wall_time=time.perf_counter() - t0))
        log.debug("gfsc iter %d: rel_change=%.3e", it, rel)
        if callback is not None:
            callback(it, Zs, S, F, w)
        if rel < params.tol:
            trace.converged = True
            break

    points = normalize_rows(F.F) if row_normalize else np.array(F.F)
    labels = _metrics.kmeans(points, params.k, seed=params.seed, restarts=restarts)
    result = ClusteringResult(labels=labels, trace=trace, consensus=S, embedding=F,
                              view_graphs=Zs, weights=w)
    return _attach_metrics(result, data)


def gf(data: MultiViewDataset, params: Hyperparams, *, init: str = "random",
       restarts: int = KMEANS_RESTARTS, callback=None) -> ClusteringResult:
    """Fusion without the structure term, followed by spectral clustering.

    Alternates view-graph, weighted-mean consensus and weight updates with
    the same stopping rule as :func:`gfsc`; ``params.gamma`` is ignored.
    """
    Xs = data.views
    grams = [ViewGram(X) for X in Xs]
    Zs, S, _, w = initialize(data, params, init=init, grams=grams)
    trace = SolverTrace()
    for it in range(1, params.max_iter + 1):
        t0 = time.perf_counter()
        if it > 1:
            Zs = [update_view_graph(X, S, params.alpha, params.beta, wv, view_index=v, G=G)
                  for v, (X, G, wv) in enumerate(zip(Xs, grams, w.w))]
        S_prev = S
        S = update_consensus(Zs, w, None, params.beta, 0.0)
        w = compute_weights(Zs, S)
        rel = relative_change(S, S_prev)
        trace.append(IterationRecord(
            iteration=it, objective=objective(Zs, S, None, Xs, params, w),
            rel_change=rel, weights=[float(x) for x in w.w],
            wall_time=time.perf_counter() - t0))
        if callback is not None:
            callback(it, Zs, S, None, w)
        if rel < params.tol:
            trace.converged = True
            break
    labels = spectral_clustering(S, params.k, seed=params.seed, restarts=restarts)
    result = ClusteringResult(labels=labels, trace=trace, consensus=S,
                              view_graphs=Zs, weights=w)
    return _attach_metrics(result, data)


def sc_view(data: MultiViewDataset, params: Hyperparams, view: int, *,
            restarts: int = KMEANS_RESTARTS) -> ClusteringResult:
    """Spectral clustering on the uncoupled graph of a single view."""
    if not 0 <= view < data.t:
        raise DimensionError(f"view {view} out of range for t={data.t}")
    Z = learn_single_view_graph(data.views[view], params.alpha, view_index=view)
    S = ConsensusGraph(Z.matrix)
    labels = spectral_clustering(S, params.k, seed=params.seed, restarts=restarts)
    return _attach_metrics(ClusteringResult(labels=labels, consensus=S, view_graphs=[Z]), data)


def sc_ave(data: MultiViewDataset, params: Hyperparams, *,
           restarts: int = KMEANS_RESTARTS) -> ClusteringResult:
    """Spectral clustering on the mean of the uncoupled view graphs."""
    Zs = [learn_single_view_graph(X, params.alpha, view_index=v)
          for v, X in enumerate(data.views)]
    S = average_graph(Zs)
    labels = spectral_clustering(S, params.k, seed=params.seed, restarts=restarts)
    return _attach_metrics(ClusteringResult(labels=labels, consensus=S, view_graphs=Zs), data)


def kmeans_concat(data: MultiViewDataset, params: Hyperparams, *,
                  restarts: int = KMEANS_RESTARTS) -> ClusteringResult:
    """k-means on all views' features stacked together."""
    points = np.vstack(data.views).T
    labels = _metrics.kmeans(points, params.k, seed=params.seed, restarts=restarts)
    return _attach_metrics(ClusteringResult(labels=labels), data)
