import json

import numpy as np
import pytest

from gfsc import experiment as ex
from gfsc.cli import main
from gfsc.data import generate_synthetic, save_dataset
from gfsc.errors import InputError
from gfsc.metrics import kmeans
from gfsc.solver import sc_ave
from gfsc.types import Hyperparams

PLANTED = dict(alpha=1.0, beta=0.1, gamma=0.01)


@pytest.fixture(scope="module")
def synth_manifest(tmp_path_factory):
    d = generate_synthetic(60, 2, 3, noise=0.0, seed=0)
    return str(save_dataset(d, tmp_path_factory.mktemp("syn")))


@pytest.fixture(scope="module")
def noisy_manifest(tmp_path_factory):
    d = generate_synthetic(45, 2, 3, noise=0.6, seed=1)
    return str(save_dataset(d, tmp_path_factory.mktemp("noisy")))


def _config(manifest, method="gfsc", reps=3, **kw):
    return ex.ExperimentConfig(manifest=manifest, method=method,
                               params=Hyperparams(k=3, **PLANTED), repetitions=reps, **kw)


def test_parse_method():
    assert ex.parse_method("sc-view:2") == ("sc-view", 2)
    assert ex.method_label("sc-view:2") == "SC(2)"
    for bad in ("sc-view", "sc-view:0", "gfsc:1", "nope"):
        with pytest.raises(InputError):
            ex.parse_method(bad)


def test_config_validation(synth_manifest):
    with pytest.raises(InputError):
        _config(synth_manifest, reps=0)
    with pytest.raises(InputError):
        _config(synth_manifest, grid={"alpha": [1.0, -1.0]})


def test_planted_report(synth_manifest):
    rep = ex.run_experiment(_config(synth_manifest, reps=10))
    assert rep["summary"]["acc"] == {"mean": 1.0, "std": 0.0}
    assert [r["seed"] for r in rep["runs"]] == list(range(10))
    assert rep["summary"]["completed"] == 10


def test_report_roundtrip(synth_manifest, tmp_path):
    out = tmp_path / "r.json"
    rep = ex.run_experiment(_config(synth_manifest, out=str(out)))
    assert ex.load_report(out) == json.loads(json.dumps(rep))
    assert "GFSC" in out.with_suffix(".txt").read_text()


def test_reports_byte_identical(noisy_manifest, tmp_path):
    for name in ("a.json", "b.json"):
        ex.run_experiment(_config(noisy_manifest, out=str(tmp_path / name)))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_workers_do_not_change_report(noisy_manifest):
    a = ex.run_experiment(_config(noisy_manifest, reps=2))
    b = ex.run_experiment(_config(noisy_manifest, reps=2, workers=2))
    assert json.dumps(a["runs"]) == json.dumps(b["runs"])


def test_sc_ave_wiring(noisy_manifest):
    cfg = _config(noisy_manifest, method="sc-ave", reps=2)
    rep = ex.run_experiment(cfg)
    from gfsc.data import load_dataset
    d = load_dataset(noisy_manifest)
    for run in rep["runs"]:
        direct = sc_ave(d, Hyperparams(k=3, seed=run["seed"], **PLANTED))
        assert run["labels"] == direct.labels.tolist()


def test_kmeans_concat_wiring(noisy_manifest):
    from gfsc.data import load_dataset
    d = load_dataset(noisy_manifest)
    rep = ex.run_experiment(_config(noisy_manifest, method="kmeans-concat", reps=1))
    stacked = np.vstack(d.views).T
    assert stacked.shape == (45, sum(d.dims))
    assert rep["runs"][0]["labels"] == kmeans(stacked, 3, seed=0).tolist()


def test_one_cell_grid_equals_run(noisy_manifest):
    cfg = _config(noisy_manifest, reps=2)
    run = ex.run_experiment(cfg)
    grid = ex.grid_search(_config(noisy_manifest, reps=2, grid={"alpha": [1.0]}))
    assert len(grid["surface"]) == 1
    assert json.dumps(grid["reports"][0]["runs"]) == json.dumps(run["runs"])
    assert grid["reports"][0]["summary"] == run["summary"]


def test_grid_surface_rows(noisy_manifest, tmp_path):
    out = tmp_path / "g.json"
    cfg = _config(noisy_manifest, reps=1, out=str(out),
                  grid={"alpha": [0.1, 1.0], "beta": [0.1], "gamma": [0.001, 0.01, 0.1]})
    res = ex.grid_search(cfg)
    rows = ex.load_surface(out.with_suffix(".surface.csv"))
    assert len(rows) == 2 * 1 * 3 == len(res["surface"])
    assert res["best"]["acc_mean"] == max(r["acc_mean"] for r in rows)
    for row, cell in zip(rows, res["surface"]):
        assert row["acc_mean"] == cell["acc_mean"]


def test_failed_runs_are_recorded(noisy_manifest):
    # a large structure weight drives the raw consensus away from every view
    cfg = ex.ExperimentConfig(manifest=noisy_manifest, method="gfsc",
                              params=Hyperparams(1e-3, 0.1, 1.0, 3), repetitions=2)
    rep = ex.run_experiment(cfg)
    assert rep["summary"]["failed"] == 2
    assert all(r["numerical"] for r in rep["runs"])
    assert rep["summary"]["acc"] is None


def test_format_table_layout(synth_manifest):
    rep = ex.run_experiment(_config(synth_manifest, reps=2))
    lines = ex.format_table([rep]).splitlines()
    assert [c.strip() for c in lines[0].split(" | ")] == ["Method", "Acc", "Purity", "NMI"]
    assert lines[2].startswith("GFSC") and "100.00(0.00)" in lines[2]


# --- CLI -------------------------------------------------------------------

def test_cli_synth_run(tmp_path, capsys):
    assert main(["synth", "--n", "60", "--out", str(tmp_path / "d")]) == 0
    manifest = str(tmp_path / "d" / "manifest.json")
    out = tmp_path / "res.json"
    code = main(["run", "--manifest", manifest, "--reps", "2", "--out", str(out),
                 "--trace-dir", str(tmp_path / "traces")])
    assert code == 0
    assert "100.00(0.00)" in capsys.readouterr().out
    rep = ex.load_report(out)
    assert rep["summary"]["acc"]["mean"] == 1.0
    trace = json.loads((tmp_path / "traces" / "gfsc-rep0.json").read_text())
    assert "wall_time" not in rep["runs"][0]["trace"]["records"][0]
    assert trace["n_iter"] == rep["runs"][0]["trace"]["n_iter"]


def test_cli_baseline_and_grid(tmp_path, capsys):
    main(["synth", "--n", "30", "--t", "2", "--out", str(tmp_path / "d")])
    manifest = str(tmp_path / "d" / "manifest.json")
    assert main(["baseline", "--manifest", manifest, "--reps", "1",
                 "--out", str(tmp_path / "b.json")]) == 0
    text = capsys.readouterr().out
    for label in ("SC(1)", "SC(2)", "SC(Ave)", "KM", "GF", "GFSC"):
        assert label in text
    assert main(["grid", "--manifest", manifest, "--reps", "1", "--alphas", "0.1,1",
                 "--betas", "0.1", "--gammas", "0.01", "--out", str(tmp_path / "g.json")]) == 0
    assert len(ex.load_surface(tmp_path / "g.surface.csv")) == 2


def test_cli_dataset_error_exit_code(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"name": "x", "views": [{"path": "missing.csv"}]}))
    assert main(["run", "--manifest", str(bad), "--k", "2"]) == 2


def test_cli_numerical_exit_code(tmp_path):
    main(["synth", "--n", "45", "--noise", "0.6", "--seed", "1", "--out", str(tmp_path / "d")])
    code = main(["run", "--manifest", str(tmp_path / "d" / "manifest.json"), "--reps", "1",
                 "--alpha", "1e-3", "--beta", "0.1", "--gamma", "1"])
    assert code == 3
