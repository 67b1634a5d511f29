"""Time each hot kernel under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both implementations are imported from one process; the numba variants are
warmed up once so compilation is excluded.  Results are also cross-checked.
"""
import argparse
import math
import timeit

import numpy as np

from mlgosc import _kernels
from mlgosc.oscillator import psi_origin_table


def cases():
    rng = np.random.default_rng(0)
    omega, tau = 1.0, 0.7
    cols = np.arange(0, 40, 2, dtype=np.int64)
    weights = rng.normal(size=cols.size) + 1j * rng.normal(size=cols.size)
    rows = np.arange(0, 1 << 16, 2, dtype=np.int64)
    psi = psi_origin_table(rows[-1] + 1)[rows]
    dense_rows = np.arange(600, dtype=np.int64)
    dense_cols = np.arange(40, dtype=np.int64)
    block = rng.normal(size=(dense_rows.size, dense_cols.size))
    dense_w = weights[:1].repeat(dense_cols.size)
    sigma = 0.5
    b = 1.0 + 2.0 * sigma * sigma
    gauss = (200, 200, math.log(b), math.log(4.0 * sigma * sigma / b),
             -0.5 * math.log(b) - 0.5 * math.log(math.pi))
    x = np.linspace(0.0, 2 * math.pi, 801)
    k = np.arange(0, 4096, 2)
    osc_w = np.where(k == 0, 0.0, psi_origin_table(4097)[k] ** 2 / np.maximum(k, 1) ** 2)
    return {
        "window_norm_sq_rank1 (32768 x 20)":
            ("window_norm_sq_rank1", (rows, psi, cols, weights, omega, tau)),
        "window_norm_sq_dense (600 x 40)":
            ("window_norm_sq_dense", (block, dense_rows, dense_cols, dense_w, omega, tau)),
        "gaussian_block (200 x 200)":
            ("gaussian_block", gauss),
        "oscillatory_sum (801 x 2048)":
            ("oscillatory_sum", (x, 0.0, 2.0, np.ascontiguousarray(osc_w))),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':38s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for label, (name, call_args) in cases().items():
        fast = getattr(_kernels, f"_{name}_numba")
        slow = getattr(_kernels, f"_{name}_numpy")
        a = np.asarray(fast(*call_args))
        ref = np.asarray(slow(*call_args))
        diff = float(np.max(np.abs(a - ref)) / max(1e-300, float(np.max(np.abs(ref)))))
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{label:38s} {1e3 * t_fast:10.3f} {1e3 * t_slow:10.3f} "
              f"{t_slow / t_fast:8.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
