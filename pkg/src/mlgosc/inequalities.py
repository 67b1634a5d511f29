"""Modified LG inequality kernels and the trajectory-probability identity.

Every kernel is a signed combination of <F^2> values (time^2 units).
Macrorealism requires each kernel >= 0; the four-time family is also
bounded above by 2 tau_D^2.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .correlators import (CorrelatorValue, DwellMethod, DwellTime, as_coupling,
                          dwell_time_sq, f12sq_eigenstate_closed, f12sq_expectation)
from .coupling import TimeWindow
from .errors import CouplingError, DomainError, WindowMismatchError
from .oscillator import OscillatorConfig, StateVector, fock_state

SQRT2 = math.sqrt(2.0)


class InequalityFamily(str, enum.Enum):
    MLG3 = "mLG3"
    MLG4 = "mLG4"
    STAT3 = "Stat3"
    STAT4 = "Stat4"
    STATIONARY = "Stat3+Stat4"
    TWO_TIME_DELTA = "TwoTimeDelta"


def violation_tolerance(tail: float) -> float:
    return max(1e-12, 3.0 * tail)


@dataclass(frozen=True)
class InequalityReport:
    """Kernels of one family with their violation flags.

    ``luders_scale`` is a single lower reference for three-time kernels and a
    (lower, upper) pair for the four-time family.
    """

    family: InequalityFamily
    kernels: tuple[float, ...]
    violated: tuple[bool, ...]
    luders_scale: float | tuple[float, float]
    tau_d_sq: float
    tail_estimate: float = 0.0
    upper_bound: float | None = None
    inputs: dict = field(default_factory=dict, compare=False)

    @property
    def any_violated(self) -> bool:
        return any(self.violated)

    @property
    def min_kernel(self) -> float:
        return min(self.kernels)

    def to_dict(self) -> dict:
        scale = self.luders_scale
        return {
            "family": self.family.value,
            "kernels": list(self.kernels),
            "violated": list(self.violated),
            "luders_scale": list(scale) if isinstance(scale, tuple) else scale,
            "tau_d_sq": self.tau_d_sq,
            "tail_estimate": self.tail_estimate,
            "inputs": self.inputs,
        }


def _flags(kernels, tail: float, upper: float | None = None) -> tuple[bool, ...]:
    tol = violation_tolerance(tail)
    out = []
    for k in kernels:
        bad = k < -tol or (upper is not None and k > upper + tol)
        out.append(bool(bad))
    return tuple(out)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def _check_chain(parts: list[CorrelatorValue], whole: CorrelatorValue) -> None:
    """Windows must tile [t_1, t_last] and ``whole`` must span the union."""
    wins = [p.window for p in parts] + [whole.window]
    if any(w is None for w in wins):
        return
    for a, b in zip(parts, parts[1:]):
        if not _close(a.window.t2, b.window.t1):
            raise WindowMismatchError(
                f"windows not contiguous: [{a.window.t1}, {a.window.t2}] then "
                f"[{b.window.t1}, {b.window.t2}]")
    for p in parts:
        if p.window.tau <= 0:
            raise WindowMismatchError("windows must have t_i < t_(i+1)")
    if not (_close(whole.window.t1, parts[0].window.t1)
            and _close(whole.window.t2, parts[-1].window.t2)):
        raise WindowMismatchError(
            f"outer window [{whole.window.t1}, {whole.window.t2}] does not span "
            f"[{parts[0].window.t1}, {parts[-1].window.t2}]")
    couplings = {v.coupling for v in parts + [whole] if v.coupling is not None}
    if len(couplings) > 1:
        raise WindowMismatchError("correlators computed with different couplings")


def _window_inputs(values) -> list:
    return [[v.window.t1, v.window.t2] if v.window is not None else None for v in values]


def _tau_d(dwell: DwellTime | float) -> float:
    return dwell.tau_d_sq if isinstance(dwell, DwellTime) else float(dwell)


def mlg3_evaluate(f12: CorrelatorValue, f23: CorrelatorValue, f13: CorrelatorValue,
                  dwell: DwellTime | float) -> InequalityReport:
    """The four three-time kernels, in order

    F12 + F13 - F23,  F12 - F13 + F23,  -F12 + F13 + F23,
    -F12 - F13 - F23 + 2 tau_D^2.
    """
    _check_chain([f12, f23], f13)
    a, b, c = f12.value, f13.value, f23.value
    td = _tau_d(dwell)
    kernels = (a + b - c, a - b + c, -a + b + c, 2.0 * td - a - b - c)
    tail = f12.tail_estimate + f23.tail_estimate + f13.tail_estimate
    return InequalityReport(
        InequalityFamily.MLG3, kernels, _flags(kernels, tail), -0.25 * td, td, tail,
        inputs={"windows": _window_inputs([f12, f23, f13]), **_coupling_input(f12)})


def mlg4_evaluate(f12: CorrelatorValue, f23: CorrelatorValue, f34: CorrelatorValue,
                  f14: CorrelatorValue, dwell: DwellTime | float) -> InequalityReport:
    """Four-time kernels with the single minus sign on F14, F34, F23, F12 in turn.

    Each must lie in [0, 2 tau_D^2].
    """
    _check_chain([f12, f23, f34], f14)
    a, b, c, d = f12.value, f23.value, f34.value, f14.value
    td = _tau_d(dwell)
    kernels = (a + b + c - d, a + b - c + d, a - b + c + d, -a + b + c + d)
    tail = sum(v.tail_estimate for v in (f12, f23, f34, f14))
    upper = 2.0 * td
    return InequalityReport(
        InequalityFamily.MLG4, kernels, _flags(kernels, tail, upper),
        ((1.0 - SQRT2) * td, (1.0 + SQRT2) * td), td, tail, upper_bound=upper,
        inputs={"windows": _window_inputs([f12, f23, f34, f14]), **_coupling_input(f12)})


def _coupling_input(v: CorrelatorValue) -> dict:
    return {"coupling": v.coupling.label} if v.coupling is not None else {}


def stationary_kernels(n: int, tau: float, table,
                       config: OscillatorConfig | None = None) -> InequalityReport:
    """(2F(tau) - F(2tau), 3F(tau) - F(3tau)) for the eigenstate |n>."""
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    f1 = f12sq_eigenstate_closed(n, tau, coupling, config)
    f2 = f12sq_eigenstate_closed(n, 2 * tau, coupling, config)
    f3 = f12sq_eigenstate_closed(n, 3 * tau, coupling, config)
    kernels = (2 * f1.value - f2.value, 3 * f1.value - f3.value)
    tail = max(2 * f1.tail_estimate + f2.tail_estimate, 3 * f1.tail_estimate + f3.tail_estimate)
    state = fock_state(n, _level_policy(n, config))
    td = dwell_time_sq(state, coupling, config, DwellMethod.SPECTRAL).tau_d_sq
    return InequalityReport(
        InequalityFamily.STATIONARY, kernels, _flags(kernels, tail), -0.25 * td, td, tail,
        inputs={"state": f"fock:{n}", "coupling": coupling.label, "tau": tau})


def _level_policy(n: int, config: OscillatorConfig):
    pol = config.truncation
    return pol if pol.max_level >= n else replace(pol, max_level=max(n, 2))


def contiguous_windows(tau: float, count: int, t1: float = 0.0) -> list[TimeWindow]:
    return [TimeWindow(t1 + i * tau, t1 + (i + 1) * tau) for i in range(count)]


def mlg3_for_state(state: StateVector, tau: float, table, config: OscillatorConfig | None = None,
                   t1: float = 0.0, dwell: DwellTime | None = None) -> InequalityReport:
    """mLG3 kernels on the equal-interval windows [t1, t1+tau, t1+2tau]."""
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    w12, w23 = contiguous_windows(tau, 2, t1)
    f12 = f12sq_expectation(state, w12, coupling, config)
    f23 = f12sq_expectation(state, w23, coupling, config)
    f13 = f12sq_expectation(state, TimeWindow(w12.t1, w23.t2), coupling, config)
    dwell = dwell or dwell_time_sq(state, coupling, config)
    return mlg3_evaluate(f12, f23, f13, dwell)


def mlg4_for_state(state: StateVector, tau: float, table, config: OscillatorConfig | None = None,
                   t1: float = 0.0, dwell: DwellTime | None = None) -> InequalityReport:
    config = config or OscillatorConfig()
    coupling = as_coupling(table)
    ws = contiguous_windows(tau, 3, t1)
    fs = [f12sq_expectation(state, w, coupling, config) for w in ws]
    f14 = f12sq_expectation(state, TimeWindow(ws[0].t1, ws[-1].t2), coupling, config)
    dwell = dwell or dwell_time_sq(state, coupling, config)
    return mlg4_evaluate(*fs, f14, dwell)


def lg2_two_time_delta(f12: CorrelatorValue, dwell: DwellTime | float) -> float:
    """tau_D^2 - tau_D^2/2 - tau_D^2/2 + <F12^2> for the point coupling.

    The half-occupation terms cancel the dwell time exactly, so the kernel
    is <F12^2> itself and never negative beyond truncation noise.
    """
    if f12.coupling is not None and not f12.coupling.is_delta:
        raise CouplingError("two-time kernel reduction holds only for the delta coupling")
    td = _tau_d(dwell)
    return td - 0.5 * td - 0.5 * td + f12.value


def _sign(s) -> int:
    if s in (1, -1):
        return int(s)
    if s in ("+", "-"):
        return 1 if s == "+" else -1
    raise DomainError(f"sign must be +1 or -1, got {s!r}")


def trajectory_probability_pair(c12: float, c23: float, c13: float, s1, s2, s3) -> float:
    """1/4 (1 + s1 s2 C12 + s2 s3 C23 + s1 s3 C13); negative values signal MR violation."""
    for name, c in (("c12", c12), ("c23", c23), ("c13", c13)):
        if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
            raise DomainError(f"{name}={c} outside [-1, 1]")
    s1, s2, s3 = _sign(s1), _sign(s2), _sign(s3)
    return 0.25 * (1.0 + s1 * s2 * c12 + s2 * s3 * c23 + s1 * s3 * c13)
