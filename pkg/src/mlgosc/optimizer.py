"""Search over coherent states for the most negative mLG kernel at fixed tau.

Kernels grow like tau^2 without bound, so the search ranks states by the
kernel in units of the state's own dwell time, kernel / tau_D^2(alpha).  The
window start is fixed at t1 = 0: free evolution rotates alpha -> alpha e^{-iwt},
so every other start is some other point of the complex-alpha plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .correlators import as_coupling, dwell_time_sq
from .errors import DomainError, MlgError
from .inequalities import InequalityFamily, mlg3_for_state, mlg4_for_state
from .io import write_csv
from .oscillator import (OscillatorConfig, alpha_from_phase_space, coherent_amplitudes,
                         required_level)

# intermediate cutoff used when the caller leaves k_max automatic; the
# kernels are then known to a few 1e-5 relative, ample for locating optima
OPTIMIZER_K_MAX = 2048

SWEEP_HEADER = ["omega_tau", "x0", "p0", "best_kernel", "kernel_index", "tau_d_sq"]


@dataclass(frozen=True)
class SearchDomain:
    x0_range: tuple[float, float] = (-4.0, 4.0)
    p0_range: tuple[float, float] = (-4.0, 4.0)
    grid: tuple[int, int] = (41, 41)
    refine_tol: float = 1e-8
    convention: str = "quadrature"

    def __post_init__(self):
        grid = self.grid if isinstance(self.grid, tuple) else (int(self.grid), int(self.grid))
        object.__setattr__(self, "grid", tuple(int(g) for g in grid))
        for name, (lo, hi) in (("x0_range", self.x0_range), ("p0_range", self.p0_range)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"{name} must be finite, got {(lo, hi)}")
            if not lo < hi:
                raise DomainError(f"{name} is empty: {(lo, hi)}")
        if min(self.grid) < 2:
            raise DomainError(f"grid needs >= 2 points per axis, got {self.grid}")
        if not self.refine_tol > 0:
            raise DomainError(f"refine_tol must be > 0, got {self.refine_tol}")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(*self.x0_range, self.grid[0]),
                np.linspace(*self.p0_range, self.grid[1]))

    def max_alpha(self, omega: float) -> float:
        return max(abs(alpha_from_phase_space(x, p, omega, self.convention))
                   for x in self.x0_range for p in self.p0_range)


@dataclass(frozen=True)
class OptimizerResult:
    """Best state for one tau.  ``best_kernel`` is in time^2 units; the
    ranking quantity is ``normalized`` = margin / tau_d_sq."""

    tau: float
    omega_tau: float
    alpha: complex
    x0: float
    p0: float
    best_kernel: float
    kernel_index: int
    tau_d_sq: float
    margin: float
    grid_normalized: float
    converged: bool = True
    message: str = ""
    evaluations: int = 0

    @property
    def normalized(self) -> float:
        return self.margin / self.tau_d_sq

    def csv_row(self) -> list:
        return [self.omega_tau, self.x0, self.p0, self.best_kernel, self.kernel_index,
                self.tau_d_sq]


class _Objective:
    def __init__(self, tau, family, coupling, config, domain):
        self.tau = tau
        self.family = InequalityFamily(family)
        if self.family not in (InequalityFamily.MLG3, InequalityFamily.MLG4):
            raise ValueError(f"optimizer supports mLG3 and mLG4 only, got {self.family.value}")
        self.coupling = coupling
        self.config = config
        self.domain = domain
        self.calls = 0

    def evaluate(self, x0: float, p0: float):
        """(normalized margin, raw kernel, index, tau_d^2, alpha)."""
        self.calls += 1
        alpha = alpha_from_phase_space(x0, p0, self.config.omega, self.domain.convention)
        state = coherent_amplitudes(alpha, self.config.truncation)
        dwell = dwell_time_sq(state, self.coupling, self.config)
        if self.family is InequalityFamily.MLG3:
            rep = mlg3_for_state(state, self.tau, self.coupling, self.config, dwell=dwell)
            margins = list(rep.kernels)
        else:
            rep = mlg4_for_state(state, self.tau, self.coupling, self.config, dwell=dwell)
            margins = [min(k, rep.upper_bound - k) for k in rep.kernels]
        i = int(np.argmin(margins))
        return margins[i] / dwell.tau_d_sq, rep.kernels[i], i, dwell.tau_d_sq, alpha

    def __call__(self, v) -> float:
        return self.evaluate(float(v[0]), float(v[1]))[0]


def _prepare_config(config: OscillatorConfig, domain: SearchDomain) -> OscillatorConfig:
    pol = config.truncation
    level = required_level(domain.max_alpha(config.omega), pol.tail_tol)
    pol = replace(pol, max_level=max(pol.max_level, level))
    if pol.k_max is None:
        pol = replace(pol, k_max=max(OPTIMIZER_K_MAX, 4 * pol.max_level))
    return replace(config, truncation=pol)


def _better(a, b) -> bool:
    """Order by normalized margin, then |alpha| (most classical wins ties)."""
    if b is None:
        return True
    if abs(a[0] - b[0]) > 1e-12 * max(1.0, abs(b[0])):
        return a[0] < b[0]
    return abs(a[4]) < abs(b[4])


def optimize_coherent(tau: float, family=InequalityFamily.MLG3, domain: SearchDomain | None = None,
                      table="delta", config: OscillatorConfig | None = None,
                      n_starts: int = 3) -> OptimizerResult:
    """Grid scan over (x0, p0) followed by bounded Nelder-Mead from the best cells."""
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    domain = domain or SearchDomain()
    config = _prepare_config(config or OscillatorConfig(), domain)
    obj = _Objective(tau, family, as_coupling(table), config, domain)

    xs, ps = domain.axes()
    scores = np.empty((xs.size, ps.size))
    best = None
    for i, x in enumerate(xs):
        for j, p in enumerate(ps):
            cand = obj.evaluate(float(x), float(p))
            scores[i, j] = cand[0]
            if _better(cand, best):
                best, best_xp = cand, (float(x), float(p))
    grid_best = best[0]

    order = np.lexsort((np.hypot(*np.meshgrid(xs, ps, indexing="ij")).ravel(), scores.ravel()))
    hx = xs[1] - xs[0]
    hp = ps[1] - ps[0]
    bounds = [domain.x0_range, domain.p0_range]
    converged, messages = True, []
    for flat in order[:n_starts]:
        i, j = np.unravel_index(flat, scores.shape)
        x, p = xs[i], ps[j]
        simplex = np.array([[x, p], [x + 0.5 * hx, p], [x, p + 0.5 * hp]])
        simplex = np.clip(simplex, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(obj, [x, p], method="Nelder-Mead", bounds=bounds,
                       options={"xatol": domain.refine_tol, "fatol": domain.refine_tol,
                                "initial_simplex": simplex, "maxiter": 2000})
        if not res.success:
            converged = False
            messages.append(str(res.message))
        cand = obj.evaluate(float(res.x[0]), float(res.x[1]))
        if _better(cand, best):
            best, best_xp = cand, (float(res.x[0]), float(res.x[1]))

    norm, kernel, idx, td, alpha = best
    return OptimizerResult(
        tau=tau, omega_tau=config.omega * tau, alpha=alpha, x0=best_xp[0], p0=best_xp[1],
        best_kernel=kernel, kernel_index=idx, tau_d_sq=td, margin=norm * td,
        grid_normalized=grid_best, converged=converged, message="; ".join(messages),
        evaluations=obj.calls)


@dataclass
class SweepResult:
    rows: list[OptimizerResult] = field(default_factory=list)
    errors: list[tuple[float, str]] = field(default_factory=list)

    def write_csv(self, fh) -> None:
        write_csv(fh, SWEEP_HEADER, (r.csv_row() for r in self.rows))


def sweep_grid(tau_values, family=InequalityFamily.MLG3, domain: SearchDomain | None = None,
               table="delta", config: OscillatorConfig | None = None) -> SweepResult:
    """One optimize_coherent record per tau, in input order; failures are
    collected and the sweep moves on."""
    taus = [float(t) for t in tau_values]
    if not taus:
        raise DomainError("tau_values is empty")
    out = SweepResult()
    for t in taus:
        try:
            out.rows.append(optimize_coherent(t, family, domain, table, config))
        except (MlgError, ValueError) as exc:
            out.errors.append((t, f"{type(exc).__name__}: {exc}"))
    return out


def plateau_onset(omega_tau, normalized, rel_gain: float = 0.05, per: float = 0.1) -> float | None:
    """First omega*tau after which |best| grows by less than ``rel_gain`` of
    itself per ``per`` of omega*tau, for the rest of the curve."""
    x = np.asarray(omega_tau, dtype=float)
    y = np.abs(np.asarray(normalized, dtype=float))
    if x.size < 2:
        return None
    rate = np.diff(y) / np.diff(x) * per / np.maximum(y[1:], 1e-300)
    slow = rate < rel_gain
    for i in range(slow.size):
        if slow[i:].all():
            return float(x[i])
    return None
