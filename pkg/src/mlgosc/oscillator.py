"""Oscillator conventions, Fock-state amplitudes and ladder algebra.

Units: hbar = m = 1, H|n> = omega*n|n> (the zero-point energy cancels in
every quantity computed here).  Positions are measured in the oscillator
length so that the eigenfunctions at the origin do not depend on omega and
the point-coupling length L is absorbed: L*psi_0(0)**2 = 1/sqrt(pi).  This
choice reproduces the ground-state k<=4 closed form exactly; it was fixed
by that match, not given a priori.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import TruncationError, ZeroNormError

PHASE_SPACE_CONVENTIONS = ("quadrature", "canonical")


@dataclass(frozen=True)
class TruncationPolicy:
    """Cutoffs for state vectors and for the intermediate spectral sum.

    ``max_level`` bounds the Fock support of states.  ``k_max`` bounds the
    intermediate index k in sums over <m|f|k><k|f|n>; ``None`` means the
    cutoff is raised automatically (up to ``k_cap``) until the rigorous tail
    bound falls below ``tail_tol`` relative to the value.
    """

    max_level: int = 40
    tail_tol: float = 1e-8
    k_max: int | None = None
    k_cap: int = 1 << 22

    def __post_init__(self):
        if int(self.max_level) != self.max_level or self.max_level < 2:
            raise ValueError(f"max_level must be an integer >= 2, got {self.max_level!r}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be > 0, got {self.tail_tol!r}")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max!r}")


@dataclass(frozen=True)
class OscillatorConfig:
    omega: float = 1.0
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be finite and > 0, got {self.omega!r}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Fock amplitudes c_0..c_N.  ``tail`` is the dropped probability mass."""

    amplitudes: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size == 0:
            raise ValueError("state needs at least one amplitude")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def max_level(self) -> int:
        return self.amplitudes.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def is_normalized(self, tol: float) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def mean_number(self) -> float:
        n = np.arange(self.amplitudes.size)
        return float(np.sum(n * np.abs(self.amplitudes) ** 2))

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(max(size, self.amplitudes.size), dtype=np.complex128)
        out[: self.amplitudes.size] = self.amplitudes
        return out


def psi_at_origin(n: int) -> float:
    """psi_n(0) in oscillator-length units; zero for odd n.

    |psi_n(0)|^2 = pi^{-1/2} (n-1)!!/n!! is evaluated in log space so it
    stays finite for arbitrarily large n.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n % 2:
        return 0.0
    m = n // 2
    # (2m-1)!!/(2m)!! = Gamma(m+1/2) / (sqrt(pi) Gamma(m+1))
    log_sq = gammaln(m + 0.5) - gammaln(m + 1.0) - math.log(math.pi)
    return (-1.0) ** m * math.exp(0.5 * log_sq)


@lru_cache(maxsize=4)
def _origin_values(size: int) -> np.ndarray:
    out = np.zeros(size)
    m = np.arange(1, (size + 1) // 2)
    # psi_{2m}(0) = -psi_{2m-2}(0) sqrt((2m-1)/(2m)); every ratio is < 1
    ratios = -np.sqrt((2 * m - 1) / (2.0 * m))
    out[0::2] = math.pi ** -0.25 * np.concatenate([[1.0], np.cumprod(ratios)])
    out.setflags(write=False)
    return out


def psi_origin_table(size: int) -> np.ndarray:
    """psi_n(0) for n = 0..size-1 by the stable ratio recurrence."""
    # round up so the cache sees few distinct sizes
    cap = 1 << max(6, int(size - 1).bit_length())
    return _origin_values(cap)[:size]


def fock_state(n: int, policy: TruncationPolicy | None = None) -> StateVector:
    policy = policy or TruncationPolicy()
    if not 0 <= n <= policy.max_level:
        raise TruncationError(f"Fock level {n} outside max_level={policy.max_level}")
    amps = np.zeros(policy.max_level + 1, dtype=np.complex128)
    amps[n] = 1.0
    return StateVector(amps)


def coherent_tail(alpha: complex, max_level: int) -> float:
    """Poisson mass beyond max_level: exp(-|a|^2) sum_{n>N} |a|^{2n}/n!."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    return float(gammainc(max_level + 1, lam))


def coherent_amplitudes(alpha: complex, policy: TruncationPolicy | None = None) -> StateVector:
    policy = policy or TruncationPolicy()
    tail = coherent_tail(alpha, policy.max_level)
    if tail > policy.tail_tol:
        raise TruncationError(
            f"max_level={policy.max_level} drops probability {tail:.3e} > tail_tol="
            f"{policy.tail_tol:.1e} for |alpha|={abs(alpha):.4g}"
        )
    n = np.arange(policy.max_level + 1)
    amps = np.zeros(n.size, dtype=np.complex128)
    if alpha == 0:
        amps[0] = 1.0
    else:
        log_mod = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
        amps = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    return StateVector(amps, tail=tail)


def required_level(alpha_abs: float, tail_tol: float, minimum: int = 2) -> int:
    """Smallest cutoff whose coherent-state tail is below tail_tol."""
    n = max(minimum, int(alpha_abs ** 2))
    while coherent_tail(alpha_abs, n) > tail_tol:
        n += 1
    return n


def alpha_from_phase_space(x0: float, p0: float, omega: float = 1.0,
                           convention: str = "quadrature") -> complex:
    """Coherent amplitude with <X> = x0 and <P> = p0.

    ``quadrature``: X = (a + a^dag)/(2 sqrt(w)), P = i sqrt(w)(a^dag - a)/2,
    so alpha = sqrt(w) x0 + i p0/sqrt(w).  ``canonical``: hbar = m = 1
    position and momentum, alpha = (sqrt(w) x0 + i p0/sqrt(w))/sqrt(2).
    """
    a = math.sqrt(omega) * x0 + 1j * p0 / math.sqrt(omega)
    if convention == "quadrature":
        return a
    if convention == "canonical":
        return a / math.sqrt(2.0)
    raise ValueError(f"unknown convention {convention!r}; use one of {PHASE_SPACE_CONVENTIONS}")


def phase_space_from_alpha(alpha: complex, omega: float = 1.0,
                           convention: str = "quadrature") -> tuple[float, float]:
    scale = {"quadrature": 1.0, "canonical": math.sqrt(2.0)}.get(convention)
    if scale is None:
        raise ValueError(f"unknown convention {convention!r}")
    return (scale * alpha.real / math.sqrt(omega), scale * alpha.imag * math.sqrt(omega))


def lowering_expectation(state: StateVector) -> complex:
    c = state.amplitudes
    n = np.arange(1, c.size)
    return complex(np.sum(np.conj(c[:-1]) * np.sqrt(n) * c[1:]))


def position_expectation(state: StateVector, omega: float = 1.0,
                         convention: str = "quadrature") -> float:
    return phase_space_from_alpha(lowering_expectation(state), omega, convention)[0]


def momentum_expectation(state: StateVector, omega: float = 1.0,
                         convention: str = "quadrature") -> float:
    return phase_space_from_alpha(lowering_expectation(state), omega, convention)[1]


def apply_momentum(phi: StateVector, config: OscillatorConfig | None = None,
                   tol: float = 1e-14) -> StateVector:
    """Normalized p|phi> with p = i sqrt(w/2)(a^dag - a).

    The result keeps the factor i (no phase removal) and has one more level
    than ``phi`` because a^dag raises the top level.
    """
    config = config or OscillatorConfig()
    c = phi.amplitudes
    out = np.zeros(c.size + 1, dtype=np.complex128)
    n = np.arange(c.size)
    out[1:] += np.sqrt(n + 1.0) * c          # a^dag
    out[:-2] -= np.sqrt(n[1:]) * c[1:]       # a
    out *= 1j * math.sqrt(config.omega / 2.0)
    norm = math.sqrt(float(np.sum(np.abs(out) ** 2)))
    if norm <= tol:
        raise ZeroNormError("p|phi> vanishes; cannot normalize")
    return StateVector(out / norm, tail=phi.tail)


def momentum_state(n: int, policy: TruncationPolicy | None = None,
                   config: OscillatorConfig | None = None) -> StateVector:
    """Normalized p|n>, e.g. n=1 gives (sqrt2|2> - |0>)/sqrt3 up to phase."""
    policy = policy or TruncationPolicy()
    phi = fock_state(n, TruncationPolicy(max_level=max(n, 2), tail_tol=policy.tail_tol))
    psi = apply_momentum(phi, config)
    size = policy.max_level + 1
    if np.any(psi.amplitudes[size:] != 0):
        raise TruncationError(f"p|{n}> needs max_level >= {n + 1}")
    return StateVector(psi.padded(size)[:size])
