"""Self-expressive graph learning for a single view.

For view data ``X`` (features x samples) the graph ``Z`` minimizes

    ||X - X Z||_F^2 + alpha ||Z||_F^2 + beta w ||Z - S||_F^2

whose unconstrained minimizer is

    Z = (X^T X + (alpha + beta w) I)^{-1} (beta w S + X^T X).

Nonnegativity is imposed afterwards by projection.

When the view has fewer features than samples the same system is solved in
the feature space: with ``K = X X^T + c I`` and ``c = alpha + beta w``,

    Z = X^T K^{-1} X (I - (beta w / c) S) + (beta w / c) S,

which follows from the push-through and Woodbury identities and costs
``O(m n^2)`` instead of ``O(n^3)``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionError, NumericsError
from .types import ConsensusGraph, ViewGraph, clip_nonneg


def gram(X: np.ndarray) -> np.ndarray:
    """``X^T X`` for a features x samples view; raises on non-finite input."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NumericsError("view matrix contains non-finite entries")
    return X.T @ X


def _spd_solve(G: np.ndarray, shift: float, rhs: np.ndarray) -> np.ndarray:
    A = G.copy()
    A[np.diag_indices_from(A)] += shift
    try:
        factor = cho_factor(A, lower=True, overwrite_a=True, check_finite=False)
    except LinAlgError as exc:
        raise NumericsError(f"Cholesky factorization failed: {exc}") from exc
    Z = cho_solve(factor, rhs, check_finite=False)
    if not np.all(np.isfinite(Z)):
        raise NumericsError("graph solve produced non-finite entries")
    return Z


class ViewGram:
    """Cached Gram matrix of one view, in whichever space is smaller.

    ``route="primal"`` keeps ``X^T X`` (n x n), ``"dual"`` keeps ``X X^T``
    (m x m); ``"auto"`` picks the dual form when ``m < n``. The matrix is
    constant across solver iterations, only the diagonal shift changes.
    """

    def __init__(self, X, route: str = "auto"):
        X = np.asarray(X, dtype=float)
        if route not in ("auto", "primal", "dual"):
            raise ValueError(f"unknown route {route!r}")
        self.X = X
        self.dual = route == "dual" or (route == "auto" and X.shape[0] < X.shape[1])
        if self.dual:
            if not np.all(np.isfinite(X)):
                raise NumericsError("view matrix contains non-finite entries")
            self.matrix = X @ X.T
        else:
            self.matrix = gram(X)

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def solve(self, shift: float, coef: float = 0.0, S=None) -> np.ndarray:
        """``(X^T X + shift I)^{-1} (coef S + X^T X)``."""
        if not self.dual:
            rhs = self.matrix if coef == 0.0 else coef * S + self.matrix
            return _spd_solve(self.matrix, shift, rhs)
        X = self.X
        if coef == 0.0:
            return X.T @ _spd_solve(self.matrix, shift, X)
        r = coef / shift
        Z = X.T @ _spd_solve(self.matrix, shift, X - r * (X @ S))
        Z += r * S
        return Z


def _as_gram(X, G) -> ViewGram:
    if isinstance(G, ViewGram):
        return G
    if G is None:
        return ViewGram(X)
    vg = ViewGram.__new__(ViewGram)
    vg.X, vg.dual, vg.matrix = np.asarray(X, dtype=float), False, np.asarray(G, dtype=float)
    return vg


def learn_single_view_graph(X, alpha: float, *, clip: bool = True,
                            view_index: int = 0, G=None) -> ViewGraph:
    """Graph of one view with no fusion coupling (``beta = 0``)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    Z = _as_gram(X, G).solve(alpha)
    return ViewGraph(clip_nonneg(Z) if clip else Z, view_index)


def update_view_graph(X, S, alpha: float, beta: float, w: float, *,
                      clip: bool = True, view_index: int = 0, G=None) -> ViewGraph:
    """Fusion-coupled graph update for one view.

    Parameters
    ----------
    X : ndarray, shape (m, n)
        View data, features along rows.
    S : ConsensusGraph or ndarray, shape (n, n)
        Current consensus graph (raw matrix is used).
    alpha, beta, w : float
        Ridge weight, fusion weight and this view's current weight.
    clip : bool
        Project onto ``Z >= 0`` after the closed-form solve.
    G : ViewGram or ndarray, optional
        Cached Gram matrix (an ndarray is taken as ``X^T X``); it is
        constant across solver iterations.
    """
    S = S.matrix if isinstance(S, ConsensusGraph) else np.asarray(S, dtype=float)
    G = _as_gram(X, G)
    n = G.n
    if S.shape != (n, n):
        raise DimensionError(f"consensus graph has shape {S.shape}, view has n={n}")
    bw = beta * w
    Z = G.solve(alpha + bw, bw, S)
    return ViewGraph(clip_nonneg(Z) if clip else Z, view_index)


def view_subproblem_objective(X, Z, S, alpha, beta, w) -> float:
    """Per-view objective minimized by :func:`update_view_graph`."""
    X = np.asarray(X, dtype=float)
    R = X - X @ Z
    return float(np.sum(R * R) + alpha * np.sum(Z * Z)
                 + beta * w * np.sum((Z - S) ** 2))


def view_subproblem_gradient(X, Z, S, alpha, beta, w) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (-2.0 * X.T @ (X - X @ Z) + 2.0 * alpha * Z
            + 2.0 * beta * w * (Z - S))
