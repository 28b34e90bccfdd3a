"""The numba and numpy kernel backends must agree to rounding."""

import numpy as np
import pytest

from roteq.kernels import _numba, _numpy, best_split, presort


def _sym(rng, n):
    m = rng.standard_normal((n, 3, 3))
    return m + m.transpose(0, 2, 1)


def _sorted_eig(w, v):
    order = np.argsort(-w, axis=1)
    rows = np.arange(len(w))[:, None]
    return w[rows, order], v[rows, :, order].transpose(0, 2, 1)


def test_eig_backends_agree():
    a = _sym(np.random.default_rng(0), 500)
    w1, v1 = _sorted_eig(*_numba.eig3_batch(a))
    w2, v2 = _sorted_eig(*_numpy.eig3_batch(a))
    assert np.allclose(w1, w2, atol=1e-12)
    # eigenvectors agree up to sign
    dots = np.abs(np.einsum("nij,nij->nj", v1, v2))
    assert np.allclose(dots, 1.0, atol=1e-10)
    for w, v in ((w1, v1), (w2, v2)):
        recon = v @ (w[:, :, None] * v.transpose(0, 2, 1))
        assert np.max(np.abs(recon - a)) <= 1e-12


def test_qr_backends_agree():
    a = np.random.default_rng(1).standard_normal((500, 3, 3))
    q1, u1 = _numba.qr3_batch(a)
    q2, u2 = _numpy.qr3_batch(a)
    assert np.allclose(q1, q2, atol=1e-12) and np.allclose(u1, u2, atol=1e-12)
    assert np.allclose(q1 @ u1, a, atol=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_mode_rotate_backends_agree(order):
    rng = np.random.default_rng(order)
    t = rng.standard_normal((50, 3**order))
    r = np.linalg.qr(rng.standard_normal((50, 3, 3)))[0]
    assert np.allclose(_numba.mode_rotate(t, r, order), _numpy.mode_rotate(t, r, order), atol=1e-13)


def _brute_split(x, y):
    best = (-1, 0.0, 0.0)
    n = len(y)
    total = y.sum()
    base = total**2 / n
    best_score = base
    for f in range(x.shape[1]):
        vals = np.unique(x[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            t = 0.5 * (lo + hi)
            left = x[:, f] <= t
            sl, nl = y[left].sum(), left.sum()
            score = sl**2 / nl + (total - sl) ** 2 / (n - nl)
            if score > best_score + 1e-12:
                best_score = score
                best = (f, t, score - base)
    return best


def test_best_split_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal((40, 3)).round(1)
        y = rng.standard_normal(40) + 2 * (x[:, 1] > 0.2)
        order = presort(x)
        bf, bt, bgain = _brute_split(x, y)
        for impl in (_numba, _numpy):
            f, t, gain = impl.best_split_sorted(x, y, order, np.ones(40, dtype=bool))
            assert f == bf
            assert np.isclose(t, bt) and np.isclose(gain, bgain)
        assert best_split(x, y)[0] == bf


def test_presorted_subset_equals_fresh_search():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((200, 4)).round(1)
    y = rng.standard_normal(200)
    member = rng.random(200) < 0.4
    order = presort(x)
    fresh = best_split(x[member], y[member])
    for impl in (_numba, _numpy):
        assert impl.best_split_sorted(x, y, order, member) == fresh


def test_benchmark_script_runs(capsys):
    import importlib.util
    import os

    path = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--n", "200", "--repeat", "1", "--skip-end-to-end"])
    out = capsys.readouterr().out
    assert "eig3_batch" in out and "speedup" in out
