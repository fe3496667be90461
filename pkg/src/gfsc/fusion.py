"""View weighting and consensus-graph updates."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericsError
from .types import ConsensusGraph, SpectralEmbedding, ViewGraph, ViewWeights

WEIGHT_EPS = 1e-8


def _mat(g) -> np.ndarray:
    if isinstance(g, (ViewGraph, ConsensusGraph)):
        return g.matrix
    return np.asarray(g, dtype=float)


def compute_weights(Zs: Sequence, S, eps: float = WEIGHT_EPS) -> ViewWeights:
    """Inverse-distance weights ``w_v = 1 / (2 max(||Z_v - S||_F, eps))``.

    A view that coincides with the consensus gets the capped weight
    ``1 / (2 eps)``.
    """
    S = _mat(S)
    dist = []
    for Z in Zs:
        Z = _mat(Z)
        if Z.shape != S.shape:
            raise DimensionError(f"view graph {Z.shape} vs consensus {S.shape}")
        dist.append(np.linalg.norm(Z - S))
    dist = np.array(dist)
    if not np.all(np.isfinite(dist)):
        raise NumericsError("view graph or consensus diverged (non-finite distance)")
    w = 1.0 / (2.0 * np.maximum(dist, eps))
    if np.any(w == 0.0):
        raise NumericsError(f"view weights underflowed; distances {dist}")
    return ViewWeights(w)


def update_consensus(Zs: Sequence, w, p, beta: float, gamma: float) -> ConsensusGraph:
    """Closed-form consensus update, column by column.

    ``S[:, i] = (sum_v w_v Z_v[:, i] - gamma p[:, i] / (4 beta)) / sum_v w_v``

    ``p`` is the matrix of squared row distances of the current embedding
    (or a :class:`SpectralEmbedding`, from which it is computed).
    """
    w = w.w if isinstance(w, ViewWeights) else np.asarray(w, dtype=float)
    if isinstance(p, SpectralEmbedding):
        p = p.pairwise_sq_distances()
    mats = [_mat(Z) for Z in Zs]
    if len(mats) != w.size:
        raise DimensionError(f"{len(mats)} graphs but {w.size} weights")
    acc = np.zeros_like(mats[0])
    for wv, Z in zip(w, mats):
        acc += wv * Z
    if gamma != 0.0:
        acc -= (gamma / (4.0 * beta)) * np.asarray(p, dtype=float)
    return ConsensusGraph(acc / w.sum())


def average_graph(Zs: Sequence) -> ConsensusGraph:
    """Unweighted mean of the view graphs."""
    mats = [_mat(Z) for Z in Zs]
    if not mats:
        raise ValueError("need at least one graph")
    return ConsensusGraph(sum(mats) / len(mats))


def fusion_term(Zs: Sequence, S, w) -> float:
    """``sum_v w_v ||Z_v - S||_F^2`` (without the beta factor)."""
    w = w.w if isinstance(w, ViewWeights) else np.asarray(w, dtype=float)
    S = _mat(S)
    return float(sum(wv * np.sum((_mat(Z) - S) ** 2) for wv, Z in zip(w, Zs)))
