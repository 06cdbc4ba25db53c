import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from biphoton import ParameterError, QuadratureCoverageError, XGrid, make_grating
from biphoton.aperture import (
    ApertureSpec,
    analytic_ft,
    analytic_ft_squared,
    dirichlet_factor,
    quadrature_nodes,
    slit_nodes,
    transmittance,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)


def slitwise_ft(ap, q):
    """Sum of single-slit integrals, 50-digit arithmetic; valid for q != 0."""
    mpmath.mp.dps = 50
    q = mpmath.mpf(q)
    total = mpmath.mpc(0)
    for left in ap.slit_left_edges():
        a = mpmath.mpf(left)
        b = a + mpmath.mpf(ap.slit_width_s)
        total += (mpmath.exp(1j * q * b) - mpmath.exp(1j * q * a)) / (1j * q)
    return complex(total * ap.amplitude_A0 / mpmath.sqrt(2 * mpmath.pi))


# -- frozen reference values --------------------------------------------------

def test_zero_wavenumber_is_open_area(grating):
    assert analytic_ft(grating, 0.0) == pytest.approx(20 * 0.5 / SQRT_2PI, rel=1e-15)


def test_principal_order_has_full_dirichlet_gain(grating):
    # q = 2 pi / d: D = N and the envelope is sin(pi/2) / pi
    expected = 20 * math.sin(math.pi / 2) / math.pi / SQRT_2PI
    assert abs(analytic_ft(grating, 2 * math.pi)) == pytest.approx(expected, rel=1e-13)


def test_missing_even_orders(grating):
    # s = d/2 puts envelope zeros on the even orders
    for m in (2, 4, 6):
        assert abs(analytic_ft(grating, 2 * math.pi * m)) < 1e-13


@pytest.mark.parametrize("q", [0.37, 1.0, 6.2, 6.283185307179586 + 1e-6, 17.4, -41.9])
def test_matches_slitwise_sum(grating, q):
    ref = slitwise_ft(grating, q)
    assert abs(analytic_ft(grating, q) - ref) <= 1e-12 * abs(analytic_ft(grating, 0.0))


def test_continuous_through_singular_points(grating):
    for m in (0, 1, 3, -5):
        q0 = 2 * math.pi * m
        at = analytic_ft(grating, q0)
        for eps in (1e-7, -1e-9, 1e-11):
            assert abs(analytic_ft(grating, q0 + eps) - at) < 1e-5 * abs(analytic_ft(grating, 0.0))


def test_offset_multiplies_phase():
    base = make_grating(1.0, 0.3, 5)
    shifted = make_grating(1.0, 0.3, 5, center_offset=0.7)
    q = np.linspace(-20, 20, 41)
    np.testing.assert_allclose(analytic_ft(shifted, q), analytic_ft(base, q) * np.exp(1j * q * 0.7),
                               rtol=0, atol=1e-14)


def test_squared_transform_scales_amplitude():
    ap = make_grating(1.0, 0.5, 3, A0=0.8)
    q = np.linspace(-10, 10, 21)
    np.testing.assert_allclose(analytic_ft_squared(ap, q), 0.8 * analytic_ft(ap, q), atol=1e-15)


def test_scalar_and_array_returns(grating):
    assert isinstance(analytic_ft(grating, 1.0), complex)
    assert analytic_ft(grating, np.array([1.0, 2.0])).shape == (2,)
    assert isinstance(dirichlet_factor(grating, 0.0), float)
    assert dirichlet_factor(grating, 0.0) == 20


# -- properties -----------------------------------------------------------------

gratings = st.builds(
    lambda d, frac, n: make_grating(d, d * frac, n),
    st.floats(0.2, 5.0), st.floats(0.05, 1.0), st.integers(1, 40),
)


@given(gratings, st.floats(-200, 200))
def test_hermitian_symmetry(ap, q):
    assert analytic_ft(ap, -q) == pytest.approx(analytic_ft(ap, q).conjugate(), abs=1e-12)


@given(gratings, st.floats(-200, 200))
def test_bounded_by_open_area(ap, q):
    bound = ap.slit_count_N * ap.slit_width_s * ap.amplitude_A0 / SQRT_2PI
    assert abs(analytic_ft(ap, q)) <= bound * (1 + 1e-12)


@given(gratings, st.floats(-200, 200))
def test_dirichlet_bounded_by_slit_count(ap, q):
    assert abs(dirichlet_factor(ap, q)) <= ap.slit_count_N * (1 + 1e-12)


@given(st.floats(0.2, 5.0), st.integers(1, 30), st.floats(-50, 50))
def test_full_fill_is_single_wide_slit(d, n, q):
    full = make_grating(d, d, n)
    wide = make_grating(n * d, n * d, 1)
    assert analytic_ft(full, q) == pytest.approx(analytic_ft(wide, q), abs=1e-10 * n * d)


# -- transmittance and grids ----------------------------------------------------------

def test_transmittance_half_open_edges():
    ap = make_grating(1.0, 0.5, 2)  # slits [-0.75, -0.25) and [0.25, 0.75)
    assert transmittance(ap, -0.75) == 1.0
    assert transmittance(ap, -0.25) == 0.0
    assert transmittance(ap, 0.25) == 1.0
    assert transmittance(ap, 0.75) == 0.0
    assert transmittance(ap, 0.0) == 0.0
    np.testing.assert_array_equal(transmittance(ap, np.array([-1.0, -0.5, 0.5, 1.0])), [0, 1, 1, 0])


@given(gratings)
def test_transmittance_area(ap):
    quad = XGrid.covering(ap, 20001)
    area = transmittance(ap, quad.midpoints()).sum() * quad.spacing
    exact = ap.slit_count_N * ap.slit_width_s
    assert area == pytest.approx(exact, abs=2 * ap.slit_count_N * quad.spacing)


def test_aligned_grid_lands_on_edges(grating):
    quad = XGrid.aligned(grating, 8)
    x, w, dx = quadrature_nodes(grating, quad)
    assert x.size == 20 * 8
    assert dx == pytest.approx(0.5 / 8)
    assert w.sum() == pytest.approx(10.0, rel=1e-13)


def test_aligned_grid_rejects_irrational_ratio():
    with pytest.raises(ParameterError):
        XGrid.aligned(make_grating(1.0, 1 / math.pi, 3), 7)


def test_slit_nodes_tile_each_slit(grating):
    x, w, h = slit_nodes(grating, 4)
    assert x.size == 80
    assert np.all(transmittance(grating, x) == 1.0)
    assert w.sum() == pytest.approx(10.0)


def test_coverage_is_checked(grating):
    with pytest.raises(QuadratureCoverageError):
        quadrature_nodes(grating, XGrid(-1.0, 1.0, 101))


@pytest.mark.parametrize("args, field", [
    ((1.0, 0.0, 3), "slit_width_s"),
    ((1.0, 1.5, 3), "slit_width_s"),
    ((1.0, 0.5, 0), "slit_count_N"),
    ((1.0, 0.5, 2.5), "slit_count_N"),
    ((1.0, 0.5, 3, -1.0), "amplitude_A0"),
    ((float("nan"), 0.5, 3), "period_d"),
    (("1", 0.5, 3), "period_d"),
])
def test_invalid_geometry_names_field(args, field):
    with pytest.raises(ParameterError) as info:
        make_grating(*args)
    assert info.value.field == field


def test_spec_is_frozen(grating):
    assert isinstance(grating, ApertureSpec)
    with pytest.raises(AttributeError):
        grating.slit_count_N = 3
