"""Shared data model: datasets, graphs, embeddings, hyperparameters, traces.

Arrays stored on these objects are made read-only at construction so the
objects can be shared between threads without copying.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DatasetError, DimensionError, InputError

ORTHONORMAL_TOL = 1e-8
SYMMETRY_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def clip_nonneg(a: np.ndarray) -> np.ndarray:
    return np.maximum(a, 0.0)


def encode_labels(labels) -> np.ndarray:
    """Map arbitrary class ids to contiguous ids ``0..c-1`` (sorted order)."""
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes.astype(np.int64).ravel()


@dataclass(frozen=True, eq=False)
class MultiViewDataset:
    """``t`` views over the same ``n`` samples.

    Each view is stored as a ``(m_v, n)`` matrix: features along rows,
    samples along columns.
    """

    views: tuple
    labels: Optional[np.ndarray] = None
    view_names: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        views = tuple(_frozen(np.atleast_2d(v)) for v in self.views)
        if len(views) < 1:
            raise DatasetError("a dataset needs at least one view")
        n = views[0].shape[1]
        bad = [(i, v.shape) for i, v in enumerate(views) if v.shape[1] != n]
        if bad:
            detail = ", ".join(f"view {i}: shape {s}" for i, s in bad)
            raise DatasetError(f"views disagree on sample count n={n}: {detail}")
        object.__setattr__(self, "views", views)
        if self.labels is not None:
            labels = np.asarray(self.labels).ravel()
            if labels.shape[0] != n:
                raise DatasetError(
                    f"label count {labels.shape[0]} does not match n={n}")
            object.__setattr__(self, "labels", _frozen(encode_labels(labels), np.int64))
        if self.view_names is not None:
            names = tuple(str(s) for s in self.view_names)
            if len(names) != len(views):
                raise DatasetError("view_names length does not match view count")
            object.__setattr__(self, "view_names", names)

    @property
    def n(self) -> int:
        return self.views[0].shape[1]

    @property
    def t(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> tuple:
        return tuple(v.shape[0] for v in self.views)

    @property
    def n_classes(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1


def normalize_dataset(raw: MultiViewDataset) -> MultiViewDataset:
    """Min-max scale every feature row of every view into ``[-1, 1]``.

    Constant features map to 0.
    """
    out = []
    for i, X in enumerate(raw.views):
        if X.size == 0:
            raise DatasetError(f"view {i} is empty")
        lo = X.min(axis=1, keepdims=True)
        hi = X.max(axis=1, keepdims=True)
        span = hi - lo
        const = span <= 0
        scaled = 2.0 * (X - lo) / np.where(const, 1.0, span) - 1.0
        scaled = np.where(const, 0.0, scaled)
        out.append(np.clip(scaled, -1.0, 1.0))
    return MultiViewDataset(views=tuple(out), labels=raw.labels,
                            view_names=raw.view_names, name=raw.name)


@dataclass(frozen=True, eq=False)
class ViewGraph:
    matrix: np.ndarray
    view_index: int = 0

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"view graph must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ConsensusGraph:
    """Raw consensus graph plus its symmetric nonnegative copy.

    The raw matrix is what the closed-form updates produce (it can hold
    negative entries); ``symmetrized`` is what every Laplacian is built from.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"consensus graph must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @cached_property
    def symmetrized(self) -> np.ndarray:
        return _frozen(clip_nonneg(0.5 * (self.matrix + self.matrix.T)))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ViewWeights:
    w: np.ndarray

    def __post_init__(self):
        w = _frozen(np.ravel(self.w))
        if w.size < 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError(f"view weights must be finite and positive, got {w}")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return self.w.size

    @classmethod
    def uniform(cls, t: int) -> "ViewWeights":
        return cls(np.full(t, 1.0 / t))


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    F: np.ndarray
    eigenvalues: Optional[np.ndarray] = None

    def __post_init__(self):
        F = _frozen(self.F)
        if F.ndim != 2:
            raise DimensionError("embedding must be an n x k matrix")
        object.__setattr__(self, "F", F)
        if self.eigenvalues is not None:
            object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))

    @property
    def k(self) -> int:
        return self.F.shape[1]

    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.F.T @ self.F - np.eye(self.k)))

    def pairwise_sq_distances(self) -> np.ndarray:
        """``p[i, j] = ||F[i] - F[j]||^2``, symmetric with zero diagonal."""
        F = self.F
        sq = np.einsum("ij,ij->i", F, F)
        p = sq[:, None] + sq[None, :] - 2.0 * (F @ F.T)
        p = 0.5 * (p + p.T)
        np.fill_diagonal(p, 0.0)
        return np.maximum(p, 0.0)


@dataclass(frozen=True, eq=False)
class SpectralQuantities:
    """Laplacian ``L = D - W`` of a symmetric nonnegative affinity ``W``."""

    W: np.ndarray
    L: np.ndarray
    degrees: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.degrees)

    @cached_property
    def sigma(self) -> np.ndarray:
        """All eigenvalues of ``L`` in nondecreasing order."""
        from scipy.linalg import eigvalsh
        return _frozen(eigvalsh(self.L))


@dataclass(frozen=True)
class Hyperparams:
    alpha: float
    beta: float
    gamma: float
    k: int
    max_iter: int = 200
    tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "tol"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise InputError(f"{name} must be a positive finite number, got {val}")
        if self.k < 2:
            raise InputError(f"k must be at least 2, got {self.k}")
        if self.max_iter < 1:
            raise InputError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    rel_change: float
    weights: list
    wall_time: float = 0.0


@dataclass
class SolverTrace:
    records: list = field(default_factory=list)
    converged: bool = False
    warnings: list = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def rel_changes(self) -> np.ndarray:
        return np.array([r.rel_change for r in self.records])

    @property
    def n_iter(self) -> int:
        return len(self.records)

    def to_dict(self, include_time: bool = False) -> dict:
        recs = []
        for r in self.records:
            d = {"iteration": r.iteration, "objective": r.objective,
                 "rel_change": r.rel_change, "weights": list(r.weights)}
            if include_time:
                d["wall_time"] = r.wall_time
            recs.append(d)
        return {"converged": self.converged, "n_iter": self.n_iter,
                "warnings": list(self.warnings), "records": recs}


@dataclass
class ClusteringResult:
    labels: np.ndarray
    trace: SolverTrace = field(default_factory=SolverTrace)
    acc: Optional[float] = None
    nmi: Optional[float] = None
    purity: Optional[float] = None
    consensus: Optional[ConsensusGraph] = None
    embedding: Optional[SpectralEmbedding] = None
    view_graphs: Optional[Sequence[ViewGraph]] = None
    weights: Optional[ViewWeights] = None

    def metrics(self) -> dict:
        return {"acc": self.acc, "nmi": self.nmi, "purity": self.purity}
