"""Single-crossing diagnostics: oscillatory part of eigenstate correlators
and its first stationary point ("turnaround").
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .correlators import _delta_tail, _gaussian_residuals, as_coupling
from .coupling import coupling_block
from .oscillator import OscillatorConfig, psi_origin_table

DEFAULT_STEP = math.pi / 400


@dataclass(frozen=True, eq=False)
class CorrelatorCurve:
    """Samples (omega*tau, value).  ``secular_coefficient`` is the M_nn^2 that
    multiplied the removed tau^2 term."""

    omega_tau: np.ndarray
    values: np.ndarray
    secular_coefficient: float = 0.0
    tail_estimate: float = 0.0

    def __post_init__(self):
        x = np.array(self.omega_tau, dtype=float)
        v = np.array(self.values, dtype=float)
        if x.shape != v.shape or x.ndim != 1:
            raise ValueError("omega_tau and values must be 1-d arrays of equal length")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("omega_tau must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values must be finite")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "omega_tau", x)
        object.__setattr__(self, "values", v)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.omega_tau.tolist(), self.values.tolist()))


def default_grid(upper: float = 2 * math.pi, step: float = DEFAULT_STEP) -> np.ndarray:
    """omega*tau grid from 0 to ``upper`` inclusive."""
    count = int(round(upper / step))
    return np.linspace(0.0, count * step, count + 1)


def _oscillatory_weights(n: int, K: int, coupling, omega: float):
    """First gap d0, gap step and weights 2 M_nk^2 / (w^2 d^2) over k <= K.

    The k = n weight is zero so the gaps form a regular progression.
    """
    step = 2 if coupling.is_delta else 1
    k = np.arange(n % step, K + 1, step)
    if coupling.is_delta:
        m = psi_origin_table(max(K, n) + 1)[n] * psi_origin_table(K + 1)[k]
    else:
        m = coupling_block(coupling, K + 1, n + 1)[:, n]
    d = (k - n).astype(float)
    safe = np.where(d == 0, 1.0, d)
    w = np.where(d == 0, 0.0, 2.0 * m ** 2 / (omega * omega * safe * safe))
    return float(d[0]), float(step), np.ascontiguousarray(w)


def _uniform_tail(n: int, K: int, coupling, omega: float) -> float:
    """Bound on sum_{k>K} of the weights times max(1 - cos) = 2, uniform in tau."""
    if coupling.is_delta:
        psi_n = psi_origin_table(n + 1)[n]
        # cap = inf reduces the delta tail bound to the 2/(w d) branch
        return 0.5 * _delta_tail(K, n, psi_n ** 2, math.inf, omega)
    if K + 1 <= n:
        return math.inf
    r = _gaussian_residuals(coupling.sigma, K, np.array([n]))[0]
    return 4.0 * r * r / (omega * omega * (K + 1 - n) ** 2)


def oscillatory_part(n: int, tau_grid, table,
                     config: OscillatorConfig | None = None) -> CorrelatorCurve:
    """<n|F^2|n>(tau) - tau^2 M_nn^2 on the given tau values.

    Summed as (2/w^2) sum_k M_nk^2 (1 - cos(w tau d))/d^2 directly, so no
    cancellation against the secular term occurs.
    """
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    omega = config.omega
    tau = np.asarray(tau_grid, dtype=float)
    secular = float(coupling_block(coupling, n + 1, n + 1)[n, n] ** 2)
    if coupling.is_delta and n % 2:
        return CorrelatorCurve(omega * tau, np.zeros_like(tau), 0.0, 0.0)

    policy = config.truncation
    if policy.k_max is not None:
        K = policy.k_max
    else:
        K = max(2 * n + 64, 128)
        scale = float(np.sum(_oscillatory_weights(n, K, coupling, omega)[2]))
        while _uniform_tail(n, K, coupling, omega) > policy.tail_tol * scale and K < policy.k_cap:
            K *= 2
    d0, step, w = _oscillatory_weights(n, K, coupling, omega)
    x = omega * tau
    values = _kernels.oscillatory_sum(np.ascontiguousarray(x), d0, step, w)
    return CorrelatorCurve(x, values, secular, _uniform_tail(n, K, coupling, omega))


def turnaround_time(curve: CorrelatorCurve, noise: float = 1e-13) -> float | None:
    """First omega*tau > 0 where the discrete derivative changes sign.

    The crossing is refined with the vertex of the parabola through the three
    samples around it.  Returns None when the sampled range has no stationary
    point.
    """
    x, v = curve.omega_tau, curve.values
    if x.size < 3:
        raise ValueError("turnaround needs at least 3 samples")
    dv = np.diff(v)
    floor = noise * max(1.0, float(np.max(np.abs(v))))
    sign = np.where(np.abs(dv) <= floor, 0, np.sign(dv)).astype(int)
    prev = 0
    for i, s in enumerate(sign):
        if s == 0:
            continue
        if prev != 0 and s != prev:
            return _vertex(x[i - 1:i + 2], v[i - 1:i + 2])
        prev = s
    return None


def _vertex(x, y) -> float:
    x0, x1, x2 = x
    y0, y1, y2 = y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return float(x1)
    xv = -b / (2 * a)
    return float(min(max(xv, x0), x2))


def sca_plausible(longest_window: float, turnaround: float | None) -> bool:
    """Windows no longer than the turnaround (in omega*tau) keep the proxy valid."""
    return turnaround is None or longest_window <= turnaround
