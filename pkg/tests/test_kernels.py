import math

import numpy as np
import pytest

from mlgosc import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _inputs(seed):
    rng = np.random.default_rng(seed)
    rows = np.arange(0, 3000, 2, dtype=np.int64)
    vals = rng.normal(size=rows.size)
    cols = np.array([0, 2, 4, 10, 22], dtype=np.int64)
    w = rng.normal(size=cols.size) + 1j * rng.normal(size=cols.size)
    return rows, vals, cols, w


@pytest.mark.parametrize("tau", [0.01, 0.7, math.pi, 5.0])
def test_rank1_paths_agree(tau):
    rows, vals, cols, w = _inputs(0)
    a = _kernels._window_norm_sq_rank1_numba(rows, vals, cols, w, 1.3, tau)
    b = _kernels._window_norm_sq_rank1_numpy(rows, vals, cols, w, 1.3, tau)
    assert a == pytest.approx(b, rel=1e-12)


def test_dense_paths_agree():
    rows, _, cols, w = _inputs(1)
    block = np.random.default_rng(2).normal(size=(rows.size, cols.size))
    a = _kernels._window_norm_sq_dense_numba(block, rows, cols, w, 0.8, 1.9)
    b = _kernels._window_norm_sq_dense_numpy(block, rows, cols, w, 0.8, 1.9)
    assert a == pytest.approx(b, rel=1e-12)


def test_gaussian_block_paths_agree():
    args = (60, 45, math.log(1.5), math.log(2.0 / 3.0), -0.5 * math.log(1.5 * math.pi))
    a = _kernels._gaussian_block_numba(*args)
    b = _kernels._gaussian_block_numpy(*args)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-300)


def test_oscillatory_paths_agree():
    x = np.linspace(0, 7, 301)
    w = 1.0 / (np.arange(1, 20001) ** 2.5)
    a = _kernels._oscillatory_sum_numba(x, -4.0, 2.0, w)
    b = _kernels._oscillatory_sum_numpy(x, -4.0, 2.0, w)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-15)


def test_flag_selects_implementation():
    expected = _kernels._window_norm_sq_rank1_numba if _kernels.USING_NUMBA \
        else _kernels._window_norm_sq_rank1_numpy
    assert _kernels.window_norm_sq_rank1 is expected


def test_env_flag_disables_numba():
    import os
    import subprocess
    import sys
    env = dict(os.environ, MLGOSC_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import mlgosc._kernels as k; print(k.USING_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
