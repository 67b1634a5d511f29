import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlgosc.coupling import (CouplingSpec, MatrixElementTable, TimeWindow, delta_matrix_elements,
                             gaussian_block, gaussian_matrix_elements, gaussian_square_diagonal,
                             matrix_elements, product_kernel_G, time_kernel_I)
from mlgosc.oscillator import OscillatorConfig
from oracles import gaussian_window, quadrature_matrix


def test_parse():
    assert CouplingSpec.parse("delta").is_delta
    g = CouplingSpec.parse("gaussian:0.5")
    assert g.sigma == 0.5 and g.label == "gaussian:0.5"
    for bad in ("gauss", "gaussian:", "gaussian:-1", "delta:2"):
        with pytest.raises(ValueError):
            CouplingSpec.parse(bad)


def test_delta_elements():
    t = delta_matrix_elements(size=8)
    assert t[0, 0] == pytest.approx(1 / math.sqrt(math.pi))
    assert t[1, 3] == 0 and t[0, 3] == 0
    assert t[0, 2] == pytest.approx(-1 / (math.sqrt(2) * math.sqrt(math.pi)))


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0, 3.0])
def test_gaussian_matches_hermite_quadrature(sigma):
    ref = quadrature_matrix(gaussian_window(sigma), 30)
    got = gaussian_matrix_elements(sigma, size=30).entries
    assert np.max(np.abs(got - ref)) < 1e-13


@pytest.mark.parametrize("sigma", [0.25, 1.0])
def test_gaussian_ground_element_closed_form(sigma):
    m00 = gaussian_matrix_elements(sigma, size=1)[0, 0]
    assert m00 == pytest.approx(1 / (math.sqrt(math.pi) * math.sqrt(1 + 2 * sigma ** 2)), rel=1e-14)


@given(st.floats(0.05, 4.0))
def test_gaussian_symmetry_and_parity(sigma):
    m = gaussian_matrix_elements(sigma, size=16).entries
    assert np.allclose(m, m.T, rtol=1e-13, atol=1e-300)
    n, k = np.indices(m.shape)
    assert np.all(m[(n + k) % 2 == 1] == 0)
    # odd-odd elements survive: the smooth window sees odd states
    assert m[1, 1] > 0


def test_narrow_gaussian_approaches_delta():
    g = gaussian_matrix_elements(1e-3, size=12).entries
    d = delta_matrix_elements(size=12).entries
    assert np.max(np.abs(g - d)) < 1e-5


@pytest.mark.parametrize("sigma", [0.3, 1.0])
def test_square_diagonal(sigma):
    f = gaussian_window(sigma)
    ref = np.diag(quadrature_matrix(lambda x: f(x) ** 2, 20))
    assert np.allclose(gaussian_square_diagonal(sigma, 20), ref, rtol=1e-12, atol=1e-15)


def test_large_tables_stay_finite():
    b = gaussian_block(0.5, 400, 400)
    assert np.all(np.isfinite(b))


def test_matrix_elements_dispatch():
    cfg = OscillatorConfig()
    assert matrix_elements(CouplingSpec.delta(), cfg).size == 41
    assert matrix_elements(CouplingSpec.gaussian(0.5), cfg, 5).coupling.sigma == 0.5


def test_csv_round_trip_bit_identical(tmp_path):
    t = gaussian_matrix_elements(0.7, size=6)
    path = tmp_path / "m.csv"
    t.to_csv(path)
    back = MatrixElementTable.from_csv(path, t.coupling)
    assert np.array_equal(back.entries, t.entries)


def test_window_validation():
    with pytest.raises(ValueError):
        TimeWindow(1.0, 0.5)
    w = TimeWindow(1.0, 3.0)
    assert (w.tau, w.midpoint) == (2.0, 2.0)
    assert w.shifted(1.0) == TimeWindow(2.0, 4.0)


def test_time_kernel_values():
    w = TimeWindow(0.3, 1.3)
    assert time_kernel_I(4, 4, w) == 1.0
    assert time_kernel_I(0, 0, TimeWindow(2.0, 2.0)) == 0
    assert time_kernel_I(2, 0, w) == pytest.approx(np.conj(time_kernel_I(0, 2, w)))
    direct = (np.exp(2j * 1.3) - np.exp(2j * 0.3)) / 2j
    assert time_kernel_I(2, 0, w) == pytest.approx(direct, rel=1e-14)


def test_even_gap_kernels_vanish_at_half_period():
    w = TimeWindow(0.2, 0.2 + math.pi)
    assert abs(time_kernel_I(4, 0, w)) < 1e-15
    assert abs(product_kernel_G(0, 2, 4, w)) < 1e-15


def test_time_kernel_scales_with_omega():
    cfg = OscillatorConfig(omega=2.0)
    w = TimeWindow(0.0, 0.5)
    direct = (np.exp(1j * 2.0 * 0.5) - 1) / (1j * 2.0)
    assert time_kernel_I(2, 1, w, cfg) == pytest.approx(direct)
