"""Detector couplings, their matrix elements M_nk and the time kernels."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import SeriesError
from .oscillator import OscillatorConfig, psi_origin_table


class CouplingKind(str, enum.Enum):
    DELTA = "delta"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class CouplingSpec:
    """Point coupling at the origin, or a unit-area Gaussian of width sigma."""

    kind: CouplingKind = CouplingKind.DELTA
    sigma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CouplingKind(self.kind))
        if self.kind is CouplingKind.GAUSSIAN:
            if self.sigma is None or not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise ValueError(f"gaussian coupling needs finite sigma > 0, got {self.sigma!r}")
        elif self.sigma is not None:
            raise ValueError("delta coupling takes no sigma")

    @classmethod
    def delta(cls) -> "CouplingSpec":
        return cls(CouplingKind.DELTA)

    @classmethod
    def gaussian(cls, sigma: float) -> "CouplingSpec":
        return cls(CouplingKind.GAUSSIAN, float(sigma))

    @classmethod
    def parse(cls, text: str) -> "CouplingSpec":
        """Parse ``delta`` or ``gaussian:<sigma>``."""
        text = text.strip().lower()
        if text == "delta":
            return cls.delta()
        head, _, tail = text.partition(":")
        if head == "gaussian" and tail:
            return cls.gaussian(float(tail))
        raise ValueError(f"bad coupling {text!r}; expected 'delta' or 'gaussian:<sigma>'")

    @property
    def is_delta(self) -> bool:
        return self.kind is CouplingKind.DELTA

    @property
    def label(self) -> str:
        return "delta" if self.is_delta else f"gaussian:{self.sigma!r}"


@dataclass(frozen=True, eq=False)
class MatrixElementTable:
    """Dense symmetric table M_nk = <n|f(x)|k>, 0 <= n, k < size."""

    coupling: CouplingSpec
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.entries[idx]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "k", "M"])
            for n in range(self.size):
                for k in range(self.size):
                    w.writerow([n, k, format(float(self.entries[n, k]), ".17g")])

    @classmethod
    def from_csv(cls, path, coupling: CouplingSpec) -> "MatrixElementTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            if next(reader) != ["n", "k", "M"]:
                raise ValueError(f"{path}: expected header n,k,M")
            for n, k, m in reader:
                rows.append((int(n), int(k), float(m)))
        size = max(max(n, k) for n, k, _ in rows) + 1
        entries = np.zeros((size, size))
        for n, k, m in rows:
            entries[n, k] = m
        return cls(coupling, _frozen(entries))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def delta_block(rows: int, cols: int) -> np.ndarray:
    psi = psi_origin_table(max(rows, cols))
    return np.outer(psi[:rows], psi[:cols])


@lru_cache(maxsize=64)
def gaussian_block(sigma: float, rows: int, cols: int) -> np.ndarray:
    """M_nk for the unit-area Gaussian window, 0 <= n < rows, 0 <= k < cols.

    Taylor coefficients of the bivariate generating function
    exp(-(q1^2 + q2^2)/b + c q1 q2)/sqrt(b), b = 1 + 2 sigma^2,
    c = 4 sigma^2 / b.  Within one coefficient all terms share a sign, so
    the log-space sum loses no precision.
    """
    b = 1.0 + 2.0 * sigma * sigma
    log_c = math.log(4.0 * sigma * sigma) - math.log(b)
    log_pref = -0.5 * math.log(b) - 0.5 * math.log(math.pi)
    out = _kernels.gaussian_block(int(rows), int(cols), math.log(b), log_c, log_pref)
    if not np.all(np.isfinite(out)):
        raise SeriesError(f"non-finite generating-function coefficients for sigma={sigma}")
    return _frozen(np.asarray(out))


def coupling_block(coupling: CouplingSpec, rows: int, cols: int) -> np.ndarray:
    if coupling.is_delta:
        return delta_block(rows, cols)
    return gaussian_block(coupling.sigma, rows, cols)


def delta_matrix_elements(config: OscillatorConfig | None = None,
                          size: int | None = None) -> MatrixElementTable:
    config = config or OscillatorConfig()
    size = size or config.truncation.max_level + 1
    return MatrixElementTable(CouplingSpec.delta(), _frozen(delta_block(size, size)))


def gaussian_matrix_elements(sigma: float, config: OscillatorConfig | None = None,
                             size: int | None = None) -> MatrixElementTable:
    config = config or OscillatorConfig()
    spec = CouplingSpec.gaussian(sigma)
    size = size or config.truncation.max_level + 1
    return MatrixElementTable(spec, gaussian_block(spec.sigma, size, size))


def matrix_elements(coupling: CouplingSpec, config: OscillatorConfig | None = None,
                    size: int | None = None) -> MatrixElementTable:
    if coupling.is_delta:
        return delta_matrix_elements(config, size)
    return gaussian_matrix_elements(coupling.sigma, config, size)


def gaussian_square_diagonal(sigma: float, size: int) -> np.ndarray:
    """<n|f(x)^2|n> for the Gaussian window, n < size.

    f^2 is (2 sigma sqrt(pi))^{-1} times the unit-area window of width
    sigma/sqrt(2).
    """
    narrow = gaussian_block(sigma / math.sqrt(2.0), size, size)
    return np.diag(narrow) / (2.0 * sigma * math.sqrt(math.pi))


@dataclass(frozen=True)
class TimeWindow:
    t1: float
    t2: float

    def __post_init__(self):
        if not self.t2 >= self.t1:
            raise ValueError(f"window needs t2 >= t1, got [{self.t1}, {self.t2}]")

    @property
    def tau(self) -> float:
        return self.t2 - self.t1

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t1 + self.t2)

    def shifted(self, s: float) -> "TimeWindow":
        return TimeWindow(self.t1 + s, self.t2 + s)


def time_kernel_I(l: int, k: int, window: TimeWindow,
                  config: OscillatorConfig | None = None) -> complex:
    """Integral of exp(i w (l-k) t) over the window.

    Written as exp(i a t_mid) * 2 sin(a tau/2)/a, which is continuous in the
    window and avoids cancellation for small a*tau.
    """
    config = config or OscillatorConfig()
    a = config.omega * (l - k)
    if a == 0:
        return complex(window.tau)
    return complex(np.exp(1j * a * window.midpoint) * 2.0 * math.sin(0.5 * a * window.tau) / a)


def product_kernel_G(n: int, l: int, k: int, window: TimeWindow,
                     config: OscillatorConfig | None = None) -> complex:
    return time_kernel_I(l, k, window, config) * time_kernel_I(k, n, window, config)
