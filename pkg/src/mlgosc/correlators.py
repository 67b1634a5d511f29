"""Modified correlators <F_12^2>, dwell times and the map to C_12.

F_12 = int_{t1}^{t2} f(x(t)) dt.  In the energy basis
<k|F_12|n> = M_kn I_kn, so <psi|F_12^2|psi> = sum_k |sum_n M_kn I_kn c_n|^2,
a sum of squares.  The intermediate index k is cut at K; the dropped part
is bounded with |I_kn| <= min(tau, 2/(w|k-n|)) and the decay of M_kn.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coupling import (CouplingSpec, MatrixElementTable, TimeWindow, coupling_block,
                       gaussian_block, gaussian_square_diagonal)
from .errors import DwellTimeError, TruncationError
from .oscillator import OscillatorConfig, StateVector, psi_origin_table

# below this omega*tau a delta-coupling tail may stay large; it is reported, not raised
SMALL_OMEGA_TAU = 1e-3


@dataclass(frozen=True)
class CorrelatorValue:
    """A modified correlator in time^2 units with its truncation bound.

    ``exact`` is False for closed forms that rest on an approximation.
    """

    value: float
    tail_estimate: float = 0.0
    window: TimeWindow | None = None
    coupling: CouplingSpec | None = None
    method: str = "spectral"
    exact: bool = True
    k_max: int | None = None


class DwellMethod(str, enum.Enum):
    WINDOW_PI = "window-pi"
    SPECTRAL = "spectral"


@dataclass(frozen=True)
class DwellTime:
    tau_d_sq: float
    method: DwellMethod = DwellMethod.SPECTRAL
    tail_estimate: float = 0.0

    def __post_init__(self):
        if self.tau_d_sq < 0:
            raise ValueError(f"tau_d_sq must be >= 0, got {self.tau_d_sq}")


def as_coupling(table) -> CouplingSpec:
    if isinstance(table, MatrixElementTable):
        return table.coupling
    if isinstance(table, CouplingSpec):
        return table
    if isinstance(table, str):
        return CouplingSpec.parse(table)
    raise TypeError(f"expected CouplingSpec or MatrixElementTable, got {type(table).__name__}")


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------

def _kernel_cap(omega: float, tau: float) -> float:
    """Upper bound on |I_kn| for even k - n, before the 2/(w|k-n|) decay.

    At w*tau = j*pi the even-gap kernels vanish; near it they are at most
    eps/w with eps the distance of w*tau to j*pi.
    """
    wt = omega * tau
    j = round(wt / math.pi)
    eps = abs(wt - j * math.pi) if j != 0 else wt
    return min(tau, eps / omega)


def _delta_tail(K: int, N: int, weight: float, cap: float, omega: float) -> float:
    """Bound on weight * sum_{k>K, even} psi_k(0)^2 min(cap, 2/(w(k-N)))^2.

    Uses psi_k(0)^2 <= sqrt(2)/(pi sqrt(k)) and an integral bound for the
    decreasing summand.
    """
    if weight == 0.0 or cap == 0.0:
        return 0.0
    a = K - 1.0
    if a <= N:
        return math.inf
    x = N + 2.0 / (omega * cap)
    if a < x:
        part = cap * cap * 2.0 * (math.sqrt(x) - math.sqrt(a))
        part += 4.0 / (omega * omega) / (math.sqrt(x) * (x - N))
    else:
        part = 4.0 / (omega * omega) / (math.sqrt(a) * (a - N))
    return weight * math.sqrt(2.0) / math.pi * 0.5 * part


def _gaussian_residuals(sigma: float, K: int, cols: np.ndarray) -> np.ndarray:
    """r_n = sqrt(sum_{k>K} M_kn^2) via <n|f^2|n> minus the kept rows."""
    size = int(cols.max()) + 1
    diag = gaussian_square_diagonal(sigma, size)[cols]
    kept = np.sum(gaussian_block(sigma, K + 1, size)[:, cols] ** 2, axis=0)
    floor = 8.0 * np.finfo(float).eps * diag * (K + 1)
    return np.sqrt(np.maximum(diag - kept, 0.0) + floor)


def _gaussian_tail(K: int, N: int, coeff: float, cap: float, omega: float) -> float:
    if coeff == 0.0 or cap == 0.0:
        return 0.0
    if K + 1 <= N:
        return math.inf
    g = min(cap, 2.0 / (omega * (K + 1 - N)))
    return g * g * coeff


# ---------------------------------------------------------------------------
# automatic cutoff
# ---------------------------------------------------------------------------

def _solve_cutoff(evaluate, bound, N: int, config: OscillatorConfig, omega_tau: float,
                  what: str) -> tuple[float, float, int]:
    """Run evaluate/bound at the policy cutoff, or grow K until the bound clears.

    ``evaluate(K)`` must be nondecreasing in K (sums of nonnegative terms).
    """
    policy = config.truncation
    if policy.k_max is not None:
        K = int(policy.k_max)
        return evaluate(K), bound(K), K
    K = max(2 * N + 64, 128)
    value = evaluate(K)
    tail = bound(K)
    K0 = K
    while tail > policy.tail_tol * abs(value):
        if K >= policy.k_cap:
            if omega_tau < SMALL_OMEGA_TAU:
                warnings.warn(
                    f"{what}: omega*tau={omega_tau:.2e} below {SMALL_OMEGA_TAU}; "
                    f"returning with enlarged tail estimate {tail:.3e}", RuntimeWarning,
                    stacklevel=3)
                break
            raise TruncationError(
                f"{what}: tail bound {tail:.3e} exceeds tail_tol*|value| = "
                f"{policy.tail_tol * abs(value):.3e} at k_max={K}; raise k_cap (now "
                f"{policy.k_cap}) or loosen tail_tol")
        K = min(2 * K, policy.k_cap)
        tail = bound(K)
    if K != K0:
        value = evaluate(K)
    return value, tail, K


# ---------------------------------------------------------------------------
# correlators
# ---------------------------------------------------------------------------

def f12sq_expectation(state: StateVector, window: TimeWindow, table,
                      config: OscillatorConfig | None = None) -> CorrelatorValue:
    """<psi|F_12^2|psi> for an arbitrary truncated Fock state."""
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    omega = config.omega
    c = state.amplitudes
    cols = np.flatnonzero(c != 0)
    if coupling.is_delta:
        cols = cols[cols % 2 == 0]
    meta = dict(window=window, coupling=coupling, method="spectral", exact=True)
    if cols.size == 0 or window.tau == 0.0:
        return CorrelatorValue(0.0, 0.0, k_max=0, **meta)

    N = int(cols.max())
    tau = window.tau
    beta = c[cols] * np.exp(-1j * omega * cols * window.midpoint)
    cap = _kernel_cap(omega, tau)

    if coupling.is_delta:
        psi_cols = psi_origin_table(N + 1)[cols]
        weights = np.ascontiguousarray(psi_cols * beta)
        s_sq = float(np.sum(np.abs(weights))) ** 2

        def evaluate(K):
            rows = np.arange(0, K + 1, 2, dtype=np.int64)
            psi = psi_origin_table(K + 1)[rows]
            return _kernels.window_norm_sq_rank1(rows, psi, cols.astype(np.int64), weights,
                                                 omega, tau)

        def bound(K):
            return _delta_tail(K, N, s_sq, cap, omega)
    else:
        sigma = coupling.sigma
        weights = np.ascontiguousarray(beta)
        absc = np.abs(c[cols])

        def evaluate(K):
            rows = np.arange(K + 1, dtype=np.int64)
            block = np.ascontiguousarray(gaussian_block(sigma, K + 1, N + 1)[:, cols])
            return _kernels.window_norm_sq_dense(block, rows, cols.astype(np.int64), weights,
                                                 omega, tau)

        def bound(K):
            if K + 1 <= N:
                return math.inf
            coeff = float(np.sum(absc * _gaussian_residuals(sigma, K, cols))) ** 2
            return _gaussian_tail(K, N, coeff, cap, omega)

    value, tail, K = _solve_cutoff(evaluate, bound, N, config, omega * tau, "f12sq_expectation")
    return CorrelatorValue(float(value), float(tail), k_max=K, **meta)


def f12sq_element(m: int, n: int, window: TimeWindow, table,
                  config: OscillatorConfig | None = None, with_tail: bool = False):
    """<m|F_12^2|n> = sum_k M_mk M_kn I_kn I_mk (complex)."""
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    omega = config.omega
    tau = window.tau
    zero = (m + n) % 2 == 1 or (coupling.is_delta and (m % 2 or n % 2)) or tau == 0.0
    if zero:
        return (0j, 0.0) if with_tail else 0j
    N = max(m, n)
    cap = _kernel_cap(omega, tau)
    phase = np.exp(1j * omega * (m - n) * window.midpoint)

    def kernels(k):
        return (tau * np.sinc(omega * (k - n) * tau / (2 * np.pi)),
                tau * np.sinc(omega * (m - k) * tau / (2 * np.pi)))

    if coupling.is_delta:
        psi_mn = psi_origin_table(N + 1)[m] * psi_origin_table(N + 1)[n]

        def evaluate(K):
            k = np.arange(0, K + 1, 2)
            s1, s2 = kernels(k)
            return psi_mn * float(np.sum(psi_origin_table(K + 1)[k] ** 2 * s1 * s2))

        def bound(K):
            return _delta_tail(K, N, abs(psi_mn), cap, omega)
    else:
        sigma = coupling.sigma

        def evaluate(K):
            k = np.arange(K + 1)
            block = gaussian_block(sigma, K + 1, N + 1)
            s1, s2 = kernels(k)
            return float(np.sum(block[:, m] * block[:, n] * s1 * s2))

        def bound(K):
            if K + 1 <= N:
                return math.inf
            r = _gaussian_residuals(sigma, K, np.array([m, n]))
            return _gaussian_tail(K, N, float(r[0] * r[1]), cap, omega)

    # the real sum is not monotone in K, so grow K on the bound alone
    if config.truncation.k_max is None:
        policy = config.truncation
        K = max(2 * N + 64, 128)
        value = evaluate(K)
        while bound(K) > policy.tail_tol * abs(value):
            if K >= policy.k_cap:
                raise TruncationError(f"f12sq_element({m},{n}): tail bound does not clear "
                                      f"tail_tol at k_max={K}")
            K = min(2 * K, policy.k_cap)
            value = evaluate(K)
        tail = bound(K)
    else:
        K = config.truncation.k_max
        value, tail = evaluate(K), bound(K)
    out = complex(phase * value)
    return (out, float(tail)) if with_tail else out


def f12sq_eigenstate_closed(n: int, tau: float, table,
                            config: OscillatorConfig | None = None) -> CorrelatorValue:
    """tau^2 M_nn^2 + (2/w^2) sum_{k!=n} M_nk^2 (1 - cos(w tau (n-k)))/(n-k)^2."""
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    omega = config.omega
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    meta = dict(window=TimeWindow(0.0, tau), coupling=coupling, method="eigenstate-closed",
                exact=True)
    if (coupling.is_delta and n % 2) or tau == 0.0:
        return CorrelatorValue(0.0, 0.0, k_max=0, **meta)
    cap = _kernel_cap(omega, tau)

    def series(k, m_nk):
        d = (n - k).astype(float)
        off = d != 0
        one_minus_cos = 2.0 * np.sin(0.5 * omega * tau * d[off]) ** 2
        return (tau * tau * float(np.sum(m_nk[~off] ** 2))
                + 2.0 / omega ** 2 * float(np.sum(m_nk[off] ** 2 * one_minus_cos / d[off] ** 2)))

    if coupling.is_delta:
        psi_n = psi_origin_table(n + 1)[n]

        def evaluate(K):
            k = np.arange(0, K + 1, 2)
            return series(k, psi_n * psi_origin_table(K + 1)[k])

        def bound(K):
            return _delta_tail(K, n, psi_n ** 2, cap, omega)
    else:
        sigma = coupling.sigma

        def evaluate(K):
            k = np.arange(K + 1)
            return series(k, gaussian_block(sigma, K + 1, n + 1)[:, n])

        def bound(K):
            if K + 1 <= n:
                return math.inf
            r = _gaussian_residuals(sigma, K, np.array([n]))
            return _gaussian_tail(K, n, float(r[0] ** 2), cap, omega)

    value, tail, K = _solve_cutoff(evaluate, bound, n, config, omega * tau,
                                   "f12sq_eigenstate_closed")
    return CorrelatorValue(float(value), float(tail), k_max=K, **meta)


def eigenstate_cos_coefficients(n: int, k_max: int, table,
                                config: OscillatorConfig | None = None) -> dict[int, float]:
    """Weights a_d of the -a_d cos(d w tau) terms in the eigenstate form.

    Keys are level gaps d = |n - k| > 0 over k <= k_max; values carry the
    1/w^2 factor.
    """
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    block = coupling_block(coupling, k_max + 1, n + 1)[:, n]
    out: dict[int, float] = {}
    for k in range(k_max + 1):
        d = abs(n - k)
        if d == 0 or block[k] == 0.0:
            continue
        out[d] = out.get(d, 0.0) + 2.0 * block[k] ** 2 / (config.omega ** 2 * d * d)
    return dict(sorted(out.items()))


def f12sq_p1_closed(tau: float, config: OscillatorConfig | None = None) -> CorrelatorValue:
    """Closed form for the p|1> state from the C(s,t) ~ cos w(t-s) approximation.

    Not the exact spectral value; flagged ``exact=False``.
    """
    config = config or OscillatorConfig()
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    w = config.omega
    x = w * tau
    value = (1.0 + 2.0 * x * x + 2.0 * x * math.sin(2.0 * x) - math.cos(2.0 * x)) / (8.0 * w * w)
    return CorrelatorValue(value, 0.0, window=TimeWindow(0.0, tau), coupling=CouplingSpec.delta(),
                           method="p1-cos-approximation", exact=False)


def p1_closed_dwell(config: OscillatorConfig | None = None) -> DwellTime:
    """pi^2/(4 w^2): the closed form above evaluated at w*tau = pi."""
    config = config or OscillatorConfig()
    return DwellTime(math.pi ** 2 / (4.0 * config.omega ** 2), DwellMethod.WINDOW_PI)


def dwell_time_sq(state: StateVector, table, config: OscillatorConfig | None = None,
                  method: DwellMethod | str = DwellMethod.SPECTRAL, t1: float = 0.0) -> DwellTime:
    """<tau_D^2> as <F_12^2> over a half period, or as (pi/w)^2 sum |c_n|^2 M_nn^2."""
    config = config or OscillatorConfig()
    method = DwellMethod(method)
    coupling = as_coupling(table)
    if method is DwellMethod.WINDOW_PI:
        half = math.pi / config.omega
        v = f12sq_expectation(state, TimeWindow(t1, t1 + half), coupling, config)
        return DwellTime(v.value, method, v.tail_estimate)
    c = state.amplitudes
    diag = np.diag(coupling_block(coupling, c.size, c.size))
    value = (math.pi / config.omega) ** 2 * float(np.sum(np.abs(c) ** 2 * diag ** 2))
    return DwellTime(value, method, 0.0)


def standard_correlator_map(f12sq: CorrelatorValue | float, dwell: DwellTime | float,
                            min_dwell: float = 1e-300) -> float:
    """C_12 = 1 - 2 <F_12^2>/<tau_D^2>.

    Exact for the free particle; for the oscillator only a short-time
    approximation.
    """
    f = f12sq.value if isinstance(f12sq, CorrelatorValue) else float(f12sq)
    d = dwell.tau_d_sq if isinstance(dwell, DwellTime) else float(dwell)
    if not d > min_dwell:
        raise DwellTimeError(f"dwell time {d!r} too small to normalize by")
    return 1.0 - 2.0 * f / d


def f12sq_curve(state: StateVector, omega_tau, table, config: OscillatorConfig | None = None,
                t1: float = 0.0) -> list[CorrelatorValue]:
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    return [f12sq_expectation(state, TimeWindow(t1, t1 + x / config.omega), coupling, config)
            for x in np.asarray(omega_tau, dtype=float)]
