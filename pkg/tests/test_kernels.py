import os
import subprocess
import sys

import mpmath as mp
import numpy as np
import pytest

from alphadiv import _kernels as K

needs_numba = pytest.mark.skipif(not K.NUMBA_AVAILABLE, reason="numba not installed")


def test_expm1_minus_x_against_mpmath():
    ys = np.concatenate([-np.logspace(-12, 1.5, 40), np.logspace(-12, 1.5, 40), [0.0]])
    got = K.expm1_minus_x(ys)
    for y, g in zip(ys, got):
        with mp.workdps(50):
            want = float(mp.expm1(mp.mpf(y)) - mp.mpf(y))
        assert g == pytest.approx(want, rel=1e-14, abs=1e-300)


def test_log1p_minus_x_against_mpmath():
    xs = np.concatenate([-np.logspace(-12, np.log10(0.999), 40), np.logspace(-12, 2, 40)])
    got = K.log1p_minus_x(xs)
    for x, g in zip(xs, got):
        with mp.workdps(50):
            want = float(mp.log1p(mp.mpf(x)) - mp.mpf(x))
        assert g == pytest.approx(want, rel=1e-13, abs=1e-300)


def _random_rows(n, k, seed):
    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(-6, 6, (n, k)), axis=1)
    op = oq = None
    if k == 4:
        op, oq = rng.integers(0, 4, n), rng.integers(0, 4, n)
    return u, op, oq


@needs_numba
@pytest.mark.parametrize("k", [3, 4])
@pytest.mark.parametrize("alpha", [-2.0, -1.0, -1e-9, 0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 3.5])
def test_backends_agree(k, alpha):
    u, op, oq = _random_rows(4000, k, seed=k)
    a, oka = K.sweep(u, op, oq, 1.0, 1.0, 0.0, 1.0, alpha, backend="numpy")
    b, okb = K.sweep(u, op, oq, 1.0, 1.0, 0.0, 1.0, alpha, backend="numba")
    assert np.array_equal(oka, okb)
    assert oka.sum() > 50
    fa, fb = a[oka], b[okb]
    assert np.array_equal(np.isinf(fa), np.isinf(fb))
    fin = np.isfinite(fa)
    assert np.all(np.abs(fa[fin] - fb[fin]) <= 1e-13 * np.maximum(1.0, np.abs(fa[fin])))


@needs_numba
def test_coincident_points_are_infeasible_in_both_backends():
    u = np.array([[0.0, 0.0, 1.0], [-1.0, 0.5, 0.5], [-2.0, 0.0, 2.0]])
    for backend in ("numpy", "numba"):
        _, ok = K.sweep(u, None, None, 0.0, 1.0, 0.1, 1.0, 0.5, backend=backend)
        assert ok.tolist() == [False, False, True]


def test_sweep_values_match_scalar_api():
    from alphadiv import alpha_divergence, make_measure, make_pair
    u, _, _ = _random_rows(500, 3, seed=9)
    vals, ok = K.sweep(u, None, None, 1.0, 1.0, 0.0, 1.0, 0.5, backend="numpy")
    wp, _ = K.solve_weights3(u, 1.0, 1.0)
    wq, _ = K.solve_weights3(u, 0.0, 1.0)
    for i in np.flatnonzero(ok)[:40]:
        pair = make_pair(make_measure(u[i], wp[i]), make_measure(u[i], wq[i]))
        assert vals[i] == pytest.approx(alpha_divergence(pair, 0.5), rel=1e-12)


def test_set_backend_roundtrip():
    old = K.get_backend()
    try:
        assert K.set_backend("numpy") == old
        assert K.get_backend() == "numpy"
        with pytest.raises(ValueError):
            K.set_backend("cuda")
    finally:
        K.set_backend(old)


@pytest.mark.parametrize("flag, want", [("0", "numpy"), ("off", "numpy")])
def test_env_flag_selects_numpy(flag, want):
    env = dict(os.environ, ALPHADIV_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from alphadiv import _kernels as K; print(K.get_backend())"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == want


@needs_numba
def test_env_flag_default_is_numba():
    env = {k: v for k, v in os.environ.items() if k != "ALPHADIV_NUMBA"}
    out = subprocess.run(
        [sys.executable, "-c", "from alphadiv import _kernels as K; print(K.get_backend())"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
