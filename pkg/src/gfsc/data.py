"""Dataset manifests, CSV ingestion, synthetic planted partitions and the
UCI Multiple Features converter."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DatasetError, InputError
from .types import MultiViewDataset, encode_labels, normalize_dataset

FEATURES_BY_SAMPLES = "features×samples"
SAMPLES_BY_FEATURES = "samples×features"
_ORIENTATION_ALIASES = {
    "features×samples": FEATURES_BY_SAMPLES,
    "features x samples": FEATURES_BY_SAMPLES,
    "features_x_samples": FEATURES_BY_SAMPLES,
    "samples×features": SAMPLES_BY_FEATURES,
    "samples x features": SAMPLES_BY_FEATURES,
    "samples_x_features": SAMPLES_BY_FEATURES,
}

# UCI Multiple Features views, in the order of the published table
MFEAT_VIEWS = (
    ("fac", "Profile correlations"),
    ("fou", "Fourier coefficients"),
    ("kar", "Karhunen coefficients"),
    ("mor", "Morphological"),
    ("pix", "Pixel averages"),
    ("zer", "Zernike moments"),
)
MFEAT_DIMS = (216, 76, 64, 6, 240, 47)


def _orientation(value: str) -> str:
    try:
        return _ORIENTATION_ALIASES[value.strip().lower()]
    except KeyError:
        raise DatasetError(f"unknown orientation {value!r}") from None


@dataclass
class ViewSpec:
    path: str
    format: str = "csv"
    orientation: str = SAMPLES_BY_FEATURES
    header: bool = False
    name: Optional[str] = None


@dataclass
class DatasetManifest:
    name: str
    views: list
    labels_path: Optional[str] = None
    expected_n: Optional[int] = None
    expected_t: Optional[int] = None
    expected_k: Optional[int] = None
    labels_header: bool = False
    base_dir: str = field(default=".", repr=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "DatasetManifest":
        views = [v if isinstance(v, ViewSpec) else ViewSpec(**v) for v in d["views"]]
        keys = ("labels_path", "expected_n", "expected_t", "expected_k", "labels_header")
        return cls(name=d.get("name", ""), views=views, base_dir=str(base_dir),
                   **{k: d[k] for k in keys if k in d})

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DatasetError(f"cannot read manifest {path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n")

    def resolve(self, p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p


def _read_csv(path: Path, header: bool) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DatasetError(f"cannot parse {path}: {exc}") from exc
    return arr


def load_dataset(manifest, normalize: bool = True) -> MultiViewDataset:
    """Read, orient to features x samples, validate and normalize."""
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)
    views, names = [], []
    for i, spec in enumerate(manifest.views):
        if spec.format != "csv":
            raise DatasetError(f"view {i}: unsupported format {spec.format!r}")
        arr = _read_csv(manifest.resolve(spec.path), spec.header)
        if _orientation(spec.orientation) == SAMPLES_BY_FEATURES:
            arr = arr.T
        views.append(arr)
        names.append(spec.name or f"view{i}")

    problems = []
    if manifest.expected_t is not None and len(views) != manifest.expected_t:
        problems.append(f"expected t={manifest.expected_t}, manifest lists {len(views)} views")
    ns = [v.shape[1] for v in views]
    if len(set(ns)) > 1:
        problems.append("views disagree on n: " + ", ".join(
            f"{nm}: {v.shape[0]} features x {v.shape[1]} samples"
            for nm, v in zip(names, views)))
    elif manifest.expected_n is not None and ns and ns[0] != manifest.expected_n:
        problems.append(f"expected n={manifest.expected_n}, views have n={ns[0]}")
    labels = None
    if manifest.labels_path:
        labels = _read_csv(manifest.resolve(manifest.labels_path), manifest.labels_header).ravel()
        if ns and labels.size != ns[0]:
            problems.append(f"{labels.size} labels for n={ns[0]} samples")
        k = np.unique(labels).size
        if manifest.expected_k is not None and k != manifest.expected_k:
            problems.append(f"expected k={manifest.expected_k}, labels have {k} classes")
    if problems:
        raise DatasetError(f"dataset {manifest.name!r} failed validation: " + "; ".join(problems))

    data = MultiViewDataset(views=tuple(views), labels=labels,
                            view_names=tuple(names), name=manifest.name)
    return normalize_dataset(data) if normalize else data


def generate_synthetic(n: int, t: int, k: int, noise: float = 0.0, seed: int = 0,
                       dim: Optional[int] = None) -> MultiViewDataset:
    """Planted partition: ``k`` balanced Gaussian clusters observed in ``t`` views.

    Each view places the cluster centers on orthogonal axes (scaled by 3),
    applies its own random rotation and adds isotropic noise of standard
    deviation ``noise``. The result is normalized.
    """
    if k < 1 or t < 1:
        raise InputError("k and t must be positive")
    if n < 2 * k:
        raise InputError(f"need n >= 2k, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    labels = rng.permutation(np.repeat(np.arange(k), sizes))
    views = []
    for v in range(t):
        m = dim if dim is not None else k + 2 + v
        if m < k:
            raise InputError(f"dim={m} is smaller than k={k}")
        Q, R = np.linalg.qr(rng.standard_normal((m, m)))
        Q *= np.sign(np.diag(R))
        centers = Q[:, :k] * 3.0
        X = centers[:, labels] + noise * rng.standard_normal((m, n))
        views.append(X)
    data = MultiViewDataset(views=tuple(views), labels=labels,
                            view_names=tuple(f"view{v}" for v in range(t)),
                            name=f"synthetic-n{n}-t{t}-k{k}")
    return normalize_dataset(data)


def save_dataset(data: MultiViewDataset, out_dir, name: Optional[str] = None) -> Path:
    """Write views (samples x features CSV), labels and a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = data.view_names or tuple(f"view{i}" for i in range(data.t))
    specs = []
    for nm, X in zip(names, data.views):
        fname = f"{nm}.csv"
        np.savetxt(out / fname, X.T, delimiter=",", fmt="%.17g")
        specs.append(ViewSpec(path=fname, orientation=SAMPLES_BY_FEATURES, name=nm))
    labels_path = None
    if data.labels is not None:
        labels_path = "labels.csv"
        np.savetxt(out / labels_path, data.labels, fmt="%d")
    manifest = DatasetManifest(name=name or data.name or out.name, views=specs,
                               labels_path=labels_path, expected_n=data.n,
                               expected_t=data.t, expected_k=data.n_classes)
    manifest.save(out / "manifest.json")
    return out / "manifest.json"


def _read_mfeat(src: Path, code: str):
    raw = src / f"mfeat-{code}"
    csv = src / f"mfeat-{code}.csv"
    if raw.is_file():
        arr = np.loadtxt(raw, ndmin=2)
        return arr, np.repeat(np.arange(10), arr.shape[0] // 10)
    if csv.is_file():
        arr = np.loadtxt(csv, delimiter=",", skiprows=1, ndmin=2)
        return arr[:, :-1], arr[:, -1].astype(np.int64)
    raise DatasetError(f"neither {raw} nor {csv} exists")


def convert_mfeat(src_dir, out_dir) -> Path:
    """Convert UCI Multiple Features files into CSV views plus a manifest.

    ``src_dir`` may hold the original whitespace-separated ``mfeat-*``
    files (200 consecutive samples per digit) or comma-separated
    ``mfeat-*.csv`` copies with a header row and a trailing label column.
    """
    src = Path(src_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs, labels = [], None
    for (code, desc), dim in zip(MFEAT_VIEWS, MFEAT_DIMS):
        X, lab = _read_mfeat(src, code)
        if X.shape[1] != dim:
            raise DatasetError(f"mfeat-{code}: expected {dim} features, found {X.shape[1]}")
        if labels is None:
            labels = lab
        elif not np.array_equal(labels, lab):
            raise DatasetError(f"mfeat-{code}: labels disagree with mfeat-{MFEAT_VIEWS[0][0]}")
        np.savetxt(out / f"{code}.csv", X, delimiter=",", fmt="%.17g")
        specs.append(ViewSpec(path=f"{code}.csv", orientation=SAMPLES_BY_FEATURES, name=code))
    np.savetxt(out / "labels.csv", encode_labels(labels), fmt="%d")
    manifest = DatasetManifest(name="digits", views=specs, labels_path="labels.csv",
                               expected_n=2000, expected_t=6, expected_k=10)
    manifest.save(out / "manifest.json")
    return out / "manifest.json"


def default_digits_manifest() -> Optional[Path]:
    """Location of a converted Digits manifest, if one exists.

    Checks ``$GFSC_DIGITS_MANIFEST`` then ``data/digits/manifest.json``
    relative to the working directory.
    """
    env = os.environ.get("GFSC_DIGITS_MANIFEST")
    for cand in (env, "data/digits/manifest.json"):
        if cand and Path(cand).is_file():
            return Path(cand)
    return None
