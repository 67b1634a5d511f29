"""Hot numerical kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  The numba path is used unless numba is
missing or ``MLGOSC_DISABLE_NUMBA`` is set to a truthy value in the
environment before import.  ``benchmarks/bench_kernels.py`` times both.
"""
import math
import os

import numpy as np

_FLAG = os.environ.get("MLGOSC_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not _DISABLED

# rows per block in the numpy path; bounds the (rows x cols) temporaries
_CHUNK = 2048


# ---------------------------------------------------------------------------
# F|psi> norm:  sum_k | sum_n M_kn beta_n S_kn |^2
#
# S_kn = 2 sin(w (k-n) tau / 2) / (w (k-n)),  S_kk = tau
# The common phase of I_kn = exp(i w (k-n) t_mid) S_kn is folded into beta.
# ---------------------------------------------------------------------------

def _window_norm_sq_rank1_numpy(row_idx, row_val, col_idx, weights, omega, tau):
    half = 0.5 * omega * tau
    sc = np.sin(half * col_idx)
    cc = np.cos(half * col_idx)
    total = 0.0
    for start in range(0, row_idx.size, _CHUNK):
        k = row_idx[start:start + _CHUNK]
        d = (k[:, None] - col_idx[None, :]).astype(np.float64)
        num = np.sin(half * k)[:, None] * cc[None, :] - np.cos(half * k)[:, None] * sc[None, :]
        same = d == 0.0
        s = np.where(same, tau, 2.0 * num / (omega * np.where(same, 1.0, d)))
        amp = s @ weights
        total += float(np.sum(row_val[start:start + _CHUNK] ** 2 * (amp.real ** 2 + amp.imag ** 2)))
    return total


def _window_norm_sq_dense_numpy(block, row_idx, col_idx, weights, omega, tau):
    half = 0.5 * omega * tau
    sc = np.sin(half * col_idx)
    cc = np.cos(half * col_idx)
    total = 0.0
    for start in range(0, row_idx.size, _CHUNK):
        k = row_idx[start:start + _CHUNK]
        d = (k[:, None] - col_idx[None, :]).astype(np.float64)
        num = np.sin(half * k)[:, None] * cc[None, :] - np.cos(half * k)[:, None] * sc[None, :]
        same = d == 0.0
        s = np.where(same, tau, 2.0 * num / (omega * np.where(same, 1.0, d)))
        amp = (block[start:start + _CHUNK] * s) @ weights
        total += float(np.sum(amp.real ** 2 + amp.imag ** 2))
    return total


def _gaussian_block_numpy(nrows, ncols, log_b, log_c, log_pref):
    lg = np.array([math.lgamma(j + 1.0) for j in range(max(nrows, ncols) + 1)])
    out = np.zeros((nrows, ncols))
    for n in range(nrows):
        m = np.arange(n % 2, ncols, 2)
        if m.size == 0:
            continue
        lmax = np.minimum(n, m)
        ls = np.arange(n % 2, n + 1, 2)
        a = (n - ls) // 2
        bb = (m[None, :] - ls[:, None]) // 2
        e = a[:, None] + bb
        logt = (-e * log_b + ls[:, None] * log_c - lg[a][:, None]
                - lg[np.clip(bb, 0, None)] - lg[ls][:, None])
        logt = np.where(ls[:, None] <= lmax[None, :], logt, -np.inf)
        top = logt.max(axis=0)
        s = np.exp(logt - top).sum(axis=0)
        sign = np.where(((n + m) // 2 - (n % 2)) % 2 == 0, 1.0, -1.0)
        base = 0.5 * (lg[n] + lg[m]) - 0.5 * (n + m) * math.log(2.0) + log_pref
        out[n, m] = sign * np.exp(base + top + np.log(s))
    return out


# ---------------------------------------------------------------------------
# oscillatory part:  sum_j w_j * 2 sin^2(x d_j / 2),  d_j = d0 + step*j
# ---------------------------------------------------------------------------

def _oscillatory_sum_numpy(x, d0, step, weights):
    out = np.zeros(x.size)
    d = d0 + step * np.arange(weights.size, dtype=np.float64)
    for start in range(0, d.size, _CHUNK):
        s = np.sin(0.5 * np.outer(x, d[start:start + _CHUNK]))
        out += 2.0 * (s * s) @ weights[start:start + _CHUNK]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _window_norm_sq_rank1_numba(row_idx, row_val, col_idx, weights, omega, tau):
        half = 0.5 * omega * tau
        ncol = col_idx.size
        sc = np.empty(ncol)
        cc = np.empty(ncol)
        for j in range(ncol):
            sc[j] = math.sin(half * col_idx[j])
            cc[j] = math.cos(half * col_idx[j])
        total = 0.0
        for i in range(row_idx.size):
            k = row_idx[i]
            sk = math.sin(half * k)
            ck = math.cos(half * k)
            re = 0.0
            im = 0.0
            for j in range(ncol):
                d = k - col_idx[j]
                if d == 0:
                    s = tau
                else:
                    s = 2.0 * (sk * cc[j] - ck * sc[j]) / (omega * d)
                re += s * weights[j].real
                im += s * weights[j].imag
            total += row_val[i] * row_val[i] * (re * re + im * im)
        return total

    @njit(cache=True)
    def _window_norm_sq_dense_numba(block, row_idx, col_idx, weights, omega, tau):
        half = 0.5 * omega * tau
        ncol = col_idx.size
        sc = np.empty(ncol)
        cc = np.empty(ncol)
        for j in range(ncol):
            sc[j] = math.sin(half * col_idx[j])
            cc[j] = math.cos(half * col_idx[j])
        total = 0.0
        for i in range(row_idx.size):
            k = row_idx[i]
            sk = math.sin(half * k)
            ck = math.cos(half * k)
            re = 0.0
            im = 0.0
            for j in range(ncol):
                d = k - col_idx[j]
                if d == 0:
                    s = tau
                else:
                    s = 2.0 * (sk * cc[j] - ck * sc[j]) / (omega * d)
                s *= block[i, j]
                re += s * weights[j].real
                im += s * weights[j].imag
            total += re * re + im * im
        return total

    @njit(cache=True)
    def _gaussian_block_numba(nrows, ncols, log_b, log_c, log_pref):
        top_n = max(nrows, ncols) + 1
        lg = np.empty(top_n)
        for j in range(top_n):
            lg[j] = math.lgamma(j + 1.0)
        out = np.zeros((nrows, ncols))
        log2 = math.log(2.0)
        for n in range(nrows):
            for m in range(n % 2, ncols, 2):
                lmax = min(n, m)
                top = -np.inf
                for l in range(n % 2, lmax + 1, 2):
                    a = (n - l) // 2
                    b = (m - l) // 2
                    t = -(a + b) * log_b + l * log_c - lg[a] - lg[b] - lg[l]
                    if t > top:
                        top = t
                s = 0.0
                for l in range(n % 2, lmax + 1, 2):
                    a = (n - l) // 2
                    b = (m - l) // 2
                    t = -(a + b) * log_b + l * log_c - lg[a] - lg[b] - lg[l]
                    s += math.exp(t - top)
                e = (n + m) // 2 - (n % 2)
                sign = 1.0 if e % 2 == 0 else -1.0
                base = 0.5 * (lg[n] + lg[m]) - 0.5 * (n + m) * log2 + log_pref
                out[n, m] = sign * math.exp(base + top + math.log(s))
        return out


    @njit(cache=True)
    def _oscillatory_sum_numba(x, d0, step, weights):
        # rotate exp(i x d / 2) by exp(i x step / 2) instead of calling sin per
        # term; the phase error grows like j*eps, far below the tail bounds
        out = np.empty(x.size)
        for i in range(x.size):
            half = 0.5 * x[i]
            rr = math.cos(half * step)
            ri = math.sin(half * step)
            zr = math.cos(half * d0)
            zi = math.sin(half * d0)
            acc = 0.0
            for j in range(weights.size):
                acc += weights[j] * zi * zi
                zr, zi = zr * rr - zi * ri, zr * ri + zi * rr
            out[i] = 2.0 * acc
        return out


if USING_NUMBA:
    window_norm_sq_rank1 = _window_norm_sq_rank1_numba
    window_norm_sq_dense = _window_norm_sq_dense_numba
    gaussian_block = _gaussian_block_numba
    oscillatory_sum = _oscillatory_sum_numba
else:
    window_norm_sq_rank1 = _window_norm_sq_rank1_numpy
    window_norm_sq_dense = _window_norm_sq_dense_numpy
    gaussian_block = _gaussian_block_numpy
    oscillatory_sum = _oscillatory_sum_numpy
