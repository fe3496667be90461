"""Repetition protocol, grid search and report files."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import solver
from .data import load_dataset
from .errors import GFSCError, InputError, NumericsError
from .types import Hyperparams, MultiViewDataset

log = logging.getLogger(__name__)

METHODS = ("gfsc", "gf", "sc-view", "sc-ave", "kmeans-concat")
DEFAULT_GRID = tuple(10.0 ** e for e in range(-7, 8))
METRICS = ("acc", "purity", "nmi")


def parse_method(method: str):
    """Split ``"sc-view:2"`` into ``("sc-view", 2)``; views are numbered from 1."""
    name, _, arg = method.partition(":")
    if name not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {METHODS}")
    if name == "sc-view":
        if not arg.isdigit() or int(arg) < 1:
            raise InputError(f"sc-view needs a 1-based view number, e.g. sc-view:1, got {method!r}")
        return name, int(arg)
    if arg:
        raise InputError(f"method {name!r} takes no argument")
    return name, None


def method_label(method: str) -> str:
    name, view = parse_method(method)
    return {"gfsc": "GFSC", "gf": "GF", "sc-ave": "SC(Ave)",
            "kmeans-concat": "KM"}.get(name, f"SC({view})")


@dataclass
class ExperimentConfig:
    manifest: Optional[str]
    method: str
    params: Hyperparams
    repetitions: int = 10
    grid: Optional[dict] = None
    out: Optional[str] = None
    init: str = "random"
    row_normalize: bool = False
    workers: int = 1

    def __post_init__(self):
        parse_method(self.method)
        if self.repetitions < 1:
            raise InputError("repetitions must be at least 1")
        if self.grid is not None:
            for key, values in self.grid.items():
                if key not in ("alpha", "beta", "gamma"):
                    raise InputError(f"grid axis {key!r} is not a hyperparameter")
                if not values or any(not (v > 0) for v in values):
                    raise InputError(f"grid values for {key} must be positive and nonempty")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


def run_method(data: MultiViewDataset, method: str, params: Hyperparams,
               init: str = "random", row_normalize: bool = False):
    name, view = parse_method(method)
    if name == "gfsc":
        return solver.gfsc(data, params, init=init, row_normalize=row_normalize)
    if name == "gf":
        return solver.gf(data, params, init=init)
    if name == "sc-view":
        return solver.sc_view(data, params, view - 1)
    if name == "sc-ave":
        return solver.sc_ave(data, params)
    return solver.kmeans_concat(data, params)


def _one_run(data, method, params, init, row_normalize, rep):
    record = {"rep": rep, "seed": params.seed}
    try:
        res = run_method(data, method, params, init=init, row_normalize=row_normalize)
    except GFSCError as exc:
        record.update(error=f"{type(exc).__name__}: {exc}",
                      numerical=isinstance(exc, NumericsError))
        return record
    record.update(res.metrics())
    record["labels"] = [int(x) for x in res.labels]
    record["trace"] = res.trace.to_dict()
    return record


def _summarize(runs) -> dict:
    summary = {}
    ok = [r for r in runs if "error" not in r]
    for m in METRICS:
        vals = [r[m] for r in ok if r.get(m) is not None]
        if vals:
            summary[m] = {"mean": float(np.mean(vals)), "std": float(np.std(vals))}
        else:
            summary[m] = None
    summary["completed"] = len(ok)
    summary["failed"] = len(runs) - len(ok)
    return summary


def _dataset_info(data: MultiViewDataset) -> dict:
    return {"name": data.name, "n": data.n, "t": data.t, "dims": list(data.dims),
            "k": data.n_classes}


def _map(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [_one_run(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_one_run, *t) for t in tasks]
        return [f.result() for f in futures]


def _build_report(config, data, params, runs) -> dict:
    return {"dataset": _dataset_info(data),
            "method": config.method,
            "label": method_label(config.method),
            "params": asdict(params),
            "config": config.to_dict(),
            "summary": _summarize(runs),
            "runs": runs}


def run_experiment(config: ExperimentConfig, data: Optional[MultiViewDataset] = None) -> dict:
    """Run ``config.method`` ``repetitions`` times; run ``r`` uses seed
    ``params.seed + r``."""
    if data is None:
        data = load_dataset(config.manifest)
    tasks = [(data, config.method, replace(config.params, seed=config.params.seed + r),
              config.init, config.row_normalize, r) for r in range(config.repetitions)]
    runs = _map(tasks, config.workers)
    report = _build_report(config, data, config.params, runs)
    if config.out:
        write_report(report, config.out)
    return report


def grid_cells(config: ExperimentConfig):
    grid = config.grid or {}
    axes = [grid.get(a, [getattr(config.params, a)]) for a in ("alpha", "beta", "gamma")]
    return [dict(alpha=a, beta=b, gamma=g) for a, b, g in itertools.product(*axes)]


def grid_search(config: ExperimentConfig, data: Optional[MultiViewDataset] = None) -> dict:
    """Evaluate every (alpha, beta, gamma) cell with the repetition protocol.

    Returns a dict with ``surface`` (one row per cell, in axis order),
    ``best`` (highest mean accuracy, first cell wins ties) and the per-cell
    ``reports``.
    """
    if data is None:
        data = load_dataset(config.manifest)
    cells = grid_cells(config)
    tasks = []
    for ci, cell in enumerate(cells):
        base = replace(config.params, **cell)
        for r in range(config.repetitions):
            tasks.append((data, config.method, replace(base, seed=base.seed + r),
                          config.init, config.row_normalize, r))
    runs = _map(tasks, config.workers)
    reports, surface = [], []
    for ci, cell in enumerate(cells):
        chunk = runs[ci * config.repetitions:(ci + 1) * config.repetitions]
        cell_cfg = replace(config, params=replace(config.params, **cell), grid=None, out=None)
        rep = _build_report(cell_cfg, data, cell_cfg.params, chunk)
        reports.append(rep)
        row = dict(cell)
        for m in METRICS:
            s = rep["summary"][m]
            row[f"{m}_mean"] = s["mean"] if s else None
            row[f"{m}_std"] = s["std"] if s else None
        row["failed"] = rep["summary"]["failed"]
        surface.append(row)
    scored = [(i, r["acc_mean"]) for i, r in enumerate(surface) if r["acc_mean"] is not None]
    best = None
    if scored:
        bi = max(scored, key=lambda x: (x[1], -x[0]))[0]
        best = dict(cells[bi], acc_mean=surface[bi]["acc_mean"])
    result = {"dataset": _dataset_info(data), "method": config.method,
              "config": config.to_dict(), "best": best, "surface": surface,
              "reports": reports}
    if config.out:
        write_grid(result, config.out)
    return result


def _pct(s) -> str:
    if s is None:
        return "--"
    return f"{100 * s['mean']:.2f}({100 * s['std']:.2f})"


def format_table(reports, title: str = "") -> str:
    """Plain-text table with one row per method: Acc, Purity, NMI in percent,
    standard deviation in parentheses."""
    rows = [("Method", "Acc", "Purity", "NMI")]
    for rep in reports:
        s = rep["summary"]
        rows.append((rep["label"], _pct(s["acc"]), _pct(s["purity"]), _pct(s["nmi"])))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    line = "-+-".join("-" * w for w in widths)
    out = io.StringIO()
    if title:
        out.write(title + "\n")
    for i, r in enumerate(rows):
        out.write(" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
        if i == 0:
            out.write(line + "\n")
    return out.getvalue()


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n")


def write_report(report: dict, out) -> Path:
    """Write ``<out>`` (JSON) and a sibling ``.txt`` table."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump(report, out)
    title = f"{report['dataset']['name']}: {report['label']}"
    out.with_suffix(".txt").write_text(format_table([report], title))
    return out


def write_reports(reports, out) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump({"reports": reports}, out)
    name = reports[0]["dataset"]["name"] if reports else ""
    out.with_suffix(".txt").write_text(format_table(reports, name))
    return out


def write_grid(result: dict, out) -> Path:
    """Write the grid result as JSON plus a ``.surface.csv`` with one row per cell."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump(result, out)
    fields = ["alpha", "beta", "gamma"] + [f"{m}_{s}" for m in METRICS for s in ("mean", "std")] + ["failed"]
    with open(out.with_suffix(".surface.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in result["surface"]:
            writer.writerow({k: ("" if row[k] is None else repr(row[k])) for k in fields})
    return out


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def load_surface(path) -> list:
    with open(path, newline="") as fh:
        return [{k: (float(v) if v != "" else None) for k, v in row.items()}
                for row in csv.DictReader(fh)]
