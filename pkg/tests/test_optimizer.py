import math

import numpy as np
import pytest

from mlgosc.errors import DomainError
from mlgosc.inequalities import InequalityFamily, mlg3_for_state
from mlgosc.optimizer import SWEEP_HEADER, SearchDomain, optimize_coherent, plateau_onset, sweep_grid
from mlgosc.oscillator import OscillatorConfig, TruncationPolicy, coherent_amplitudes

SMALL = SearchDomain((-1.5, 1.5), (-3.0, 3.0), (7, 9))


def test_domain_validation():
    for bad in (dict(x0_range=(1, 1)), dict(p0_range=(0, math.inf)), dict(grid=(1, 5)),
                dict(refine_tol=0)):
        with pytest.raises(DomainError):
            SearchDomain(**bad)
    assert SearchDomain(grid=5).grid == (5, 5)


def test_nonpositive_tau_rejected():
    with pytest.raises(DomainError):
        optimize_coherent(0.0, domain=SMALL)


def test_refinement_never_worse_than_grid():
    r = optimize_coherent(0.3, domain=SMALL)
    assert r.normalized <= r.grid_normalized
    assert r.converged and r.evaluations > 63


def test_returns_raw_kernel_and_dwell():
    r = optimize_coherent(0.3, domain=SMALL)
    psi = coherent_amplitudes(r.alpha, TruncationPolicy(max_level=80))
    rep = mlg3_for_state(psi, 0.3, "delta")
    assert rep.kernels[r.kernel_index] == pytest.approx(r.best_kernel, rel=1e-4)
    assert r.tau_d_sq == pytest.approx(rep.tau_d_sq, rel=1e-10)


def test_mirror_symmetry():
    flipped = SearchDomain((-1.5, 0.0), (0.0, 3.0), (5, 5))
    unflipped = SearchDomain((0.0, 1.5), (-3.0, 0.0), (5, 5))
    c = optimize_coherent(0.3, domain=flipped)
    d = optimize_coherent(0.3, domain=unflipped)
    assert c.normalized == pytest.approx(d.normalized, rel=1e-6)
    assert (c.x0, c.p0) == pytest.approx((-d.x0, -d.p0), abs=1e-3)


def test_window_start_is_a_rotation_of_alpha():
    alpha = 0.8 - 1.1j
    t1, tau = 0.9, 0.35
    cfg = OscillatorConfig(truncation=TruncationPolicy(max_level=60, k_max=1024))
    a = mlg3_for_state(coherent_amplitudes(alpha, cfg.truncation), tau, "delta", cfg, t1=t1)
    rotated = coherent_amplitudes(alpha * np.exp(-1j * t1), cfg.truncation)
    b = mlg3_for_state(rotated, tau, "delta", cfg, t1=0.0)
    assert np.allclose(a.kernels, b.kernels, rtol=1e-10)


def test_zero_interval_limit():
    small = [abs(optimize_coherent(t, domain=SMALL).best_kernel) for t in (0.1, 0.01)]
    assert small[1] < small[0] < 0.2


def test_soft_luders_check():
    r = optimize_coherent(0.5, domain=SMALL)
    assert r.normalized >= -0.25 * 1.05


def test_mlg4_family():
    r = optimize_coherent(0.3, InequalityFamily.MLG4, SMALL)
    assert r.normalized < 0
    assert r.normalized >= (1 - math.sqrt(2)) * 1.05
    with pytest.raises(ValueError):
        optimize_coherent(0.3, InequalityFamily.STAT3, SMALL)


def test_sweep_single_and_duplicates():
    single = optimize_coherent(0.2, domain=SMALL)
    sweep = sweep_grid([0.2, 0.2], domain=SMALL)
    assert sweep.rows[0] == single
    assert sweep.rows[0] == sweep.rows[1]


def test_sweep_collects_errors():
    sweep = sweep_grid([0.2, -1.0, 0.3], domain=SMALL)
    assert [r.tau for r in sweep.rows] == [0.2, 0.3]
    assert sweep.errors[0][0] == -1.0 and "DomainError" in sweep.errors[0][1]
    with pytest.raises(DomainError):
        sweep_grid([], domain=SMALL)


def test_sweep_csv(tmp_path):
    import csv
    sweep = sweep_grid([0.2], domain=SMALL)
    path = tmp_path / "s.csv"
    with open(path, "w", newline="") as fh:
        sweep.write_csv(fh)
    rows = list(csv.reader(open(path)))
    assert rows[0] == SWEEP_HEADER
    assert float(rows[1][3]) == sweep.rows[0].best_kernel


def test_plateau_onset():
    x = np.linspace(0.1, 1.0, 10)
    y = -0.25 * (1 - np.exp(-x / 0.1))
    onset = plateau_onset(x, y)
    assert onset is not None and 0.1 < onset < 0.5
    assert plateau_onset(x, -x) is None
