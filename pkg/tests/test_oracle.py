import math

import numpy as np
import pytest

from biphoton import CorrelationKernel, UnsupportedEvaluationError, XGrid, make_grating
from biphoton.aperture import analytic_ft
from biphoton.oracle import richardson_ft, riemann_amplitude, riemann_ft
from biphoton.wavepacket import QGrid, biphoton_amplitude


def test_zero_wavenumber_within_one_edge_cell(grating):
    quad = XGrid.covering(grating, 3001)
    value = riemann_ft(grating, 0.0, quad)
    exact = 20 * 0.5 / math.sqrt(2 * math.pi)
    assert abs(value - exact) <= 2 * 20 * quad.spacing / math.sqrt(2 * math.pi)


def test_aligned_zero_wavenumber_is_exact(grating):
    value = riemann_ft(grating, 0.0, XGrid.aligned(grating, 16))
    assert value == pytest.approx(10.0 / math.sqrt(2 * math.pi), rel=1e-14)


def test_richardson_against_closed_form(small_grating, rng):
    quad = XGrid.aligned(small_grating, 256)
    f0 = abs(analytic_ft(small_grating, 0.0))
    for q in rng.uniform(-8, 8, 20) * 2 * math.pi / small_grating.period_d:
        ref = analytic_ft(small_grating, q)
        err = abs(richardson_ft(small_grating, q, quad) - ref) / max(abs(ref), 1e-8 * f0)
        assert err <= 1e-6


def test_midpoint_error_is_second_order(small_grating):
    q = 5.3
    ref = analytic_ft(small_grating, q)
    errs = [abs(riemann_ft(small_grating, q, XGrid.aligned(small_grating, c)) - ref)
            for c in (16, 32, 64)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_margin_does_not_change_sum(small_grating):
    quad = XGrid.aligned(small_grating, 32)
    h = quad.spacing
    padded = XGrid(quad.x_min - 40 * h, quad.x_max + 40 * h, quad.n_points + 80)
    for q in (0.0, 1.7, -9.2):
        assert riemann_ft(small_grating, q, padded) == pytest.approx(
            riemann_ft(small_grating, q, quad), abs=1e-13)


def test_uniform_double_sum_factorises(small_grating):
    quad = XGrid.covering(small_grating, 401)
    k = CorrelationKernel.uniform()
    for q, qp in ((0.0, 0.0), (1.3, -2.2), (7.0, 3.1)):
        double = riemann_amplitude(small_grating, k, q, qp, quad)
        product = riemann_ft(small_grating, q, quad) * riemann_ft(small_grating, qp, quad)
        assert abs(double - product) <= 1e-12 * abs(product) + 1e-15


def test_wide_gaussian_approaches_uniform(small_grating):
    quad = XGrid.covering(small_grating, 401)
    q, qp = 2 * math.pi / 2.0, -2 * math.pi / 2.0
    wide = CorrelationKernel.gaussian(1e3 * 4 * 2.0)
    g = riemann_amplitude(small_grating, wide, q, qp, quad)
    u = riemann_amplitude(small_grating, CorrelationKernel.uniform(), q, qp, quad)
    assert abs(g - u) <= 1e-3 * abs(u)


def test_gaussian_refinement_is_cauchy(small_grating):
    k = CorrelationKernel.gaussian(0.7)
    vals = [riemann_amplitude(small_grating, k, 2.1, -0.8, XGrid.aligned(small_grating, c))
            for c in (8, 16, 32)]
    first, second = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    assert second < first / 3.5


def test_matches_fast_path_on_shared_grid():
    ap = make_grating(1.0, 0.5, 5)
    quad = XGrid.covering(ap, 721)
    k = CorrelationKernel.gaussian(0.56)
    g = QGrid(-2.0, 2.0, 9)
    F = biphoton_amplitude(ap, k, g, quad)
    q = g.wavenumbers(1.0)
    scale = np.abs(F.values).max()
    for i, j in ((0, 0), (4, 4), (2, 7), (8, 1)):
        ref = riemann_amplitude(ap, k, q[i], q[j], quad)
        assert abs(F.values[i, j] - ref) <= 1e-12 * scale


def test_delta_kernel_rejected(small_grating):
    with pytest.raises(UnsupportedEvaluationError):
        riemann_amplitude(small_grating, CorrelationKernel.delta(), 0.0, 0.0,
                          XGrid.covering(small_grating, 11))
