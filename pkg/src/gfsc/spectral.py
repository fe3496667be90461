"""Graph Laplacian, spectral embedding and component counting."""
from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, eigh
from scipy.sparse.csgraph import connected_components

from .errors import InputError, NumericsError
from .types import ConsensusGraph, SpectralEmbedding, SpectralQuantities

log = logging.getLogger(__name__)

EIG_TOL = 1e-6
EDGE_TOL = 1e-8
ROW_NORM_FLOOR = 1e-12


def _affinity(S) -> np.ndarray:
    if isinstance(S, ConsensusGraph):
        return S.symmetrized
    return ConsensusGraph(S).symmetrized


def build_laplacian(S) -> SpectralQuantities:
    """Unnormalized Laplacian ``L = D - W`` of the symmetric nonnegative
    copy ``W`` of ``S``."""
    W = _affinity(S)
    degrees = W.sum(axis=1)
    L = -W.copy()
    L[np.diag_indices_from(L)] += degrees
    return SpectralQuantities(W=W, L=L, degrees=degrees)


def update_embedding(L, k: int) -> SpectralEmbedding:
    """Orthonormal eigenvectors of ``L`` for its ``k`` smallest eigenvalues."""
    if isinstance(L, SpectralQuantities):
        L = L.L
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k={k} must lie in [1, {n}]")
    if not np.all(np.isfinite(L)):
        raise NumericsError("Laplacian contains non-finite entries")
    try:
        vals, vecs = eigh(L, subset_by_index=[0, k - 1], check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise NumericsError(f"eigensolver failed: {exc}") from exc
    return SpectralEmbedding(vecs, eigenvalues=vals)


def count_components(S, eig_tol: float = EIG_TOL, edge_tol: float = EDGE_TOL,
                     trace=None) -> int:
    """Number of connected components of the consensus graph.

    Counts Laplacian eigenvalues at or below ``eig_tol * sigma_max`` and
    cross-checks against a traversal over edges heavier than ``edge_tol``.
    On disagreement a warning is logged (and appended to ``trace.warnings``
    when a trace is given); the spectral count is returned.
    """
    q = build_laplacian(S)
    sigma = q.sigma
    thr = eig_tol * max(float(sigma[-1]), 0.0)
    spectral = int(np.sum(sigma <= thr))
    traversal, _ = connected_components(q.W > edge_tol, directed=False)
    if traversal != spectral:
        msg = (f"component count disagreement: spectral={spectral}, "
               f"traversal={traversal} (eig_tol={eig_tol}, edge_tol={edge_tol})")
        log.warning(msg)
        if trace is not None:
            trace.warnings.append(msg)
    return spectral


def normalize_rows(F: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(F, axis=1, keepdims=True)
    safe = np.where(norms < ROW_NORM_FLOOR, 1.0, norms)
    return np.where(norms < ROW_NORM_FLOOR, 0.0, F / safe)


def spectral_clustering(S, k: int, seed: int = 0, *, restarts: int = 20,
                        row_normalize: bool = True) -> np.ndarray:
    """Cluster a graph: k smallest Laplacian eigenvectors, row-normalized,
    then k-means."""
    from .metrics import kmeans

    if k < 2:
        raise InputError("k must be at least 2")
    emb = update_embedding(build_laplacian(S), k)
    F = normalize_rows(emb.F) if row_normalize else np.array(emb.F)
    return kmeans(F, k, seed=seed, restarts=restarts)
