import numpy as np
import pytest

from gfsc.data import generate_synthetic
from gfsc.graph import learn_single_view_graph
from gfsc.metrics import accuracy
from gfsc.solver import (gf, gfsc, initialize, objective, relative_change, sc_ave,
                         structure_term)
from gfsc.spectral import build_laplacian, count_components, spectral_clustering
from gfsc.types import ConsensusGraph, Hyperparams, MultiViewDataset, SpectralEmbedding

PLANTED = dict(alpha=1.0, beta=0.1, gamma=0.01)


def test_objective_all_zero():
    Z = np.zeros((3, 3))
    p = Hyperparams(1, 1, 1, 2)
    assert objective([Z], Z, np.zeros((3, 2)), [np.zeros((2, 3))], p, [1.0]) == 0.0


def test_fusion_term_vanishes(rng):
    X = rng.standard_normal((2, 4))
    S = rng.random((4, 4))
    F = np.linalg.qr(rng.standard_normal((4, 2)))[0]
    p = Hyperparams(0.5, 3.0, 0.2, 2)
    a = objective([S, S], S, F, [X, X], p, [1.0, 1.0])
    b = objective([S, S], S, F, [X, X], p, [100.0, 0.01])
    assert a == pytest.approx(b, rel=1e-14)


def test_objective_naive_loop():
    r = np.random.default_rng(42)
    n, dims = 5, (3, 2)
    Xs = [r.standard_normal((m, n)) for m in dims]
    Zs = [np.maximum(r.standard_normal((n, n)), 0) for _ in dims]
    S = r.random((n, n))
    F = np.linalg.qr(r.standard_normal((n, 2)))[0]
    w = [0.7, 1.9]
    prm = Hyperparams(0.3, 1.7, 0.9, 2)
    total = 0.0
    for X, Z, wv in zip(Xs, Zs, w):
        XZ = [[sum(X[a, c] * Z[c, b] for c in range(n)) for b in range(n)] for a in range(len(X))]
        for a in range(len(X)):
            for b in range(n):
                total += (X[a, b] - XZ[a][b]) ** 2
        for a in range(n):
            for b in range(n):
                total += prm.alpha * Z[a, b] ** 2 + prm.beta * wv * (Z[a, b] - S[a, b]) ** 2
    Wsym = np.maximum((S + S.T) / 2, 0)
    for i in range(n):
        for j in range(n):
            total += prm.gamma * 0.5 * sum((F[i, c] - F[j, c]) ** 2 for c in range(2)) * Wsym[i, j]
    assert objective(Zs, S, F, Xs, prm, w) == pytest.approx(total, rel=1e-10)


def test_structure_term_raw_vs_clipped(rng):
    S = rng.random((6, 6))
    F = np.linalg.qr(rng.standard_normal((6, 2)))[0]
    # nonnegative input: clipping changes nothing
    assert structure_term(S, F) == pytest.approx(structure_term(S, F, clipped=False), rel=1e-12)


def test_initialize_weights_and_determinism():
    d = generate_synthetic(20, 4, 2, noise=0.1, seed=1)
    p = Hyperparams(1, 1, 1, 2, seed=5)
    Zs, S, F, w = initialize(d, p)
    np.testing.assert_array_equal(w.w, [0.25] * 4)
    assert F.orthonormality_error() < 1e-10
    Zs2, S2, F2, _ = initialize(d, p)
    assert np.array_equal(S.matrix, S2.matrix) and np.array_equal(F.F, F2.F)
    assert all(np.array_equal(a.matrix, b.matrix) for a, b in zip(Zs, Zs2))
    assert all(Z.matrix.min() >= 0 for Z in Zs)


def test_initialize_warm():
    d = generate_synthetic(20, 2, 2, noise=0.1, seed=1)
    p = Hyperparams(0.5, 1, 1, 2)
    _, S, _, _ = initialize(d, p, init="warm")
    expect = sum(learn_single_view_graph(X, 0.5).matrix for X in d.views) / 2
    np.testing.assert_allclose(S.matrix, expect)


def test_relative_change():
    assert relative_change(np.ones((2, 2)) * 2, np.ones((2, 2))) == pytest.approx(1.0)
    assert relative_change(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_planted_partition(seed):
    d = generate_synthetic(150, 2, 3, noise=0.0, seed=seed)
    res = gfsc(d, Hyperparams(k=3, seed=seed, **PLANTED))
    assert res.acc == 1.0
    assert count_components(res.consensus) == 3
    assert res.trace.converged


def test_block_monotonicity_debug():
    d = generate_synthetic(60, 2, 3, noise=0.3, seed=2)
    res = gfsc(d, Hyperparams(k=3, seed=0, **PLANTED), debug=True)
    assert res.trace.n_iter >= 2


def test_embedding_step_attains_ky_fan():
    d = generate_synthetic(45, 2, 3, noise=0.2, seed=4)
    checks = []

    def cb(it, Zs, S, F, w):
        sigma = np.linalg.eigvalsh(build_laplacian(S).L)
        checks.append(abs(structure_term(S, F) - sigma[:3].sum()))

    gfsc(d, Hyperparams(k=3, **PLANTED), callback=cb)
    assert max(checks) < 1e-8


def test_trace_and_stopping():
    d = generate_synthetic(60, 2, 3, noise=0.1, seed=0)
    p = Hyperparams(k=3, max_iter=4, tol=1e-12, **PLANTED)
    res = gfsc(d, p)
    assert res.trace.n_iter == 4 and not res.trace.converged
    res = gfsc(d, Hyperparams(k=3, **PLANTED))
    rc = res.trace.rel_changes
    assert rc[-1] < 1e-3 and np.all(rc[:-1] >= 1e-3)
    assert len(res.trace.records[0].weights) == 2


def test_determinism():
    d = generate_synthetic(60, 2, 3, noise=0.3, seed=3)
    p = Hyperparams(k=3, seed=7, **PLANTED)
    a, b = gfsc(d, p), gfsc(d, p)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.trace.to_dict() == b.trace.to_dict()


def test_model_collapse_single_view():
    d = generate_synthetic(60, 1, 3, noise=0.3, seed=1)
    p = Hyperparams(alpha=1.0, beta=1e-12, gamma=1e-12, k=3, seed=3)
    res = gfsc(d, p, row_normalize=True)
    Z = learn_single_view_graph(d.views[0], 1.0)
    expect = spectral_clustering(ConsensusGraph(Z.matrix), 3, seed=3)
    np.testing.assert_array_equal(res.labels, expect)


def test_gf_identical_views():
    # indicator features: the single-view graph is nonnegative, so no clipping
    truth = np.repeat(np.arange(3), 10)
    X = np.eye(3)[:, truth]
    d = MultiViewDataset(views=(X, X), labels=truth)
    res = gf(d, Hyperparams(1.0, 1.0, 1.0, 3), init="warm")
    Z = learn_single_view_graph(X, 1.0).matrix
    for V in res.view_graphs:
        np.testing.assert_allclose(V.matrix, Z, atol=1e-12)
    np.testing.assert_allclose(res.consensus.matrix, Z, atol=1e-12)
    assert res.acc == 1.0


def test_gf_planted():
    d = generate_synthetic(90, 2, 3, noise=0.0, seed=1)
    res = gf(d, Hyperparams(k=3, **PLANTED))
    assert res.acc >= 0.95


def test_sc_ave_wiring():
    d = generate_synthetic(45, 3, 3, noise=0.5, seed=2)
    p = Hyperparams(0.5, 1, 1, 3, seed=4)
    res = sc_ave(d, p)
    S = sum(learn_single_view_graph(X, 0.5).matrix for X in d.views) / 3
    np.testing.assert_array_equal(res.labels, spectral_clustering(S, 3, seed=4))
