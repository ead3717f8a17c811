"""Conserved functionals against closed forms; the localized virial weight."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqnls.errors import InvalidArgument
from cqnls.functionals import (functionals, h1_norm_sq, localized_virial_F,
                               localized_virial_P, virial_weight)
from cqnls.grid import (complex_field, derivative, make_grid, real_field,
                        volume_weights)

GRID = make_grid(20.0, 2001)


def gaussian(a, amp=1.0):
    return real_field(GRID, amp * np.exp(-a * GRID.nodes ** 2))


def test_functionals_gaussian_closed_forms():
    a, amp = 0.7, 1.3
    rep = functionals(gaussian(a, amp))
    m = amp ** 2 * (math.pi / (2 * a)) ** 1.5
    g2 = 3.0 * a * amp ** 2 * (math.pi / (2 * a)) ** 1.5
    p4 = amp ** 4 * (math.pi / (4 * a)) ** 1.5
    p6 = amp ** 6 * (math.pi / (6 * a)) ** 1.5
    assert rep.mass == pytest.approx(m, rel=1e-12)
    assert rep.h1dot ** 2 == pytest.approx(g2, rel=1e-10)
    assert rep.l4 ** 4 == pytest.approx(p4, rel=1e-12)
    assert rep.l6 ** 6 == pytest.approx(p6, rel=1e-12)
    assert rep.energy == pytest.approx(0.5 * g2 - 0.25 * p4 + p6 / 6.0,
                                       rel=1e-10)
    assert rep.virial == pytest.approx(g2 + p6 - 0.75 * p4, rel=1e-10)
    assert rep.momentum.shape == (3,) and not rep.momentum.any()


def test_h1_norm_is_mass_plus_gradient():
    f = gaussian(0.5)
    rep = functionals(f)
    assert h1_norm_sq(f) == pytest.approx(rep.mass + rep.h1dot ** 2, rel=1e-13)


def test_functionals_accept_complex_fields():
    u = complex_field(GRID, np.exp(-GRID.nodes ** 2) *
                      np.exp(0.25j * GRID.nodes ** 2))
    rep = functionals(u)
    # quadratic phase leaves every density-based functional alone, only the
    # gradient grows
    base = functionals(gaussian(1.0))
    assert rep.mass == pytest.approx(base.mass, rel=1e-13)
    assert rep.l4 == pytest.approx(base.l4, rel=1e-13)
    assert rep.h1dot > base.h1dot


# ----------------------------------------------------------- virial weight

def test_weight_infinite_radius_is_exact_parabola():
    wgt = virial_weight(math.inf, GRID)
    np.testing.assert_allclose(wgt.w, GRID.nodes ** 2, rtol=0, atol=0)
    assert np.all(wgt.wpp == 2.0)
    assert np.all(wgt.lap == 6.0)
    assert not wgt.bilap.any()


def test_weight_rejects_small_radius():
    with pytest.raises(InvalidArgument):
        virial_weight(0.5, GRID)


@pytest.mark.parametrize("R", [1.0, 4.0, 7.5])
def test_weight_shape_invariants(R):
    wgt = virial_weight(R, GRID)
    r = GRID.nodes
    inner = r <= R
    outer = r >= 2.0 * R
    np.testing.assert_allclose(wgt.w[inner], r[inner] ** 2, rtol=1e-14)
    np.testing.assert_allclose(wgt.w[outer], 25.0 * R ** 2 / 11.0, rtol=1e-14)
    assert np.all(wgt.wp >= 0.0)
    assert np.all(wgt.wpp <= 2.0 + 1e-12)
    for table in (wgt.wp, wgt.wpp, wgt.lap, wgt.bilap):
        assert not table[outer].any()


@given(R=st.floats(1.0, 9.0))
@settings(max_examples=25, deadline=None)
def test_weight_monotone_and_bounded_for_any_radius(R):
    wgt = virial_weight(R, GRID)
    assert np.all(wgt.wp >= 0.0)
    assert np.all(wgt.wpp <= 2.0 + 1e-12)
    assert np.all(wgt.w <= 25.0 * R ** 2 / 11.0 + 1e-9 * R ** 2)


def test_weight_tables_differentiate_into_each_other():
    # wp, wpp, lap, bilap must be the actual derivative chain of w, or the
    # momentum/force identity silently breaks (a C^1-only taper once cost a
    # constant 0.54 in d/dt P_R - F_R before this was pinned down)
    R = 5.0
    wgt = virial_weight(R, GRID)
    w_f = real_field(GRID, wgt.w)
    wp_num = derivative(w_f).values
    keep = slice(8, GRID.n - 8)
    np.testing.assert_allclose(wp_num[keep], wgt.wp[keep],
                               rtol=0, atol=2e-8 * R ** 2)
    wp_f = real_field(GRID, wgt.wp, parity="odd")
    wpp_num = derivative(wp_f).values
    np.testing.assert_allclose(wpp_num[keep], wgt.wpp[keep],
                               rtol=0, atol=2e-8 * R)
    r = GRID.nodes[1:]
    np.testing.assert_allclose(wgt.lap[1:], wgt.wpp[1:] + 2 * wgt.wp[1:] / r,
                               rtol=0, atol=1e-12)
    # bilap vs applying the radial Laplacian to the lap table numerically
    lap_f = real_field(GRID, wgt.lap)
    dlap = derivative(lap_f).values
    ddlap = derivative(real_field(GRID, dlap, parity="odd")).values
    bilap_num = ddlap[1:] + 2.0 * dlap[1:] / r
    np.testing.assert_allclose(bilap_num[7:-8], wgt.bilap[8:-8],
                               rtol=0, atol=5e-7)


def test_weight_bilap_on_exact_quartic():
    # radial bilaplacian telescopes to f'''' + 4 f'''/r; on r^4 that is 120
    g = make_grid(3.0, 301)
    r = g.nodes
    f = real_field(g, r ** 4)
    d1 = derivative(f).values
    d2 = derivative(real_field(g, d1, parity="odd")).values
    d3 = derivative(real_field(g, d2)).values
    d4 = derivative(real_field(g, d3, parity="odd")).values
    got = d4[1:-8] + 4.0 * d3[1:-8] / r[1:-8]
    np.testing.assert_allclose(got, 120.0, rtol=1e-8)


def test_localized_F_at_infinite_radius_is_eight_virial():
    u = complex_field(GRID, 0.8 * np.exp(-GRID.nodes ** 2 / 3.0) *
                      np.exp(0.1j * GRID.nodes ** 2))
    wgt = virial_weight(math.inf, GRID)
    rep = functionals(u)
    assert localized_virial_F(u, wgt) == pytest.approx(8.0 * rep.virial,
                                                       rel=1e-10)


def test_localized_F_matches_infinite_for_compact_data():
    # 2R beyond the support: every table equals its r^2 branch on the data
    u = complex_field(GRID, np.exp(-GRID.nodes ** 2))
    f5 = localized_virial_F(u, virial_weight(5.0, GRID))
    finf = localized_virial_F(u, virial_weight(math.inf, GRID))
    assert f5 == pytest.approx(finf, abs=1e-8 * max(1.0, abs(finf)))


def test_localized_P_closed_form_quadratic_phase():
    # u = e^{-r^2} e^{i k r^2}: P_inf = 8k int r^2 e^{-2r^2} dx
    k = 0.35
    u = complex_field(GRID, np.exp(-GRID.nodes ** 2) *
                      np.exp(1j * k * GRID.nodes ** 2))
    want = 8.0 * k * (3.0 / 8.0) * (math.pi / 2.0) ** 1.5
    got = localized_virial_P(u, virial_weight(math.inf, GRID))
    assert got == pytest.approx(want, rel=1e-10)


def test_localized_P_vanishes_for_constant_phase():
    u = complex_field(GRID, np.exp(-GRID.nodes ** 2) * np.exp(0.7j))
    wgt = virial_weight(4.0, GRID)
    assert localized_virial_P(u, wgt) == pytest.approx(0.0, abs=1e-14)


def test_localized_F_vanishes_on_soliton_any_radius(profile):
    # stationarity of the orbit, not a property of the cutoff shape
    from cqnls.evolution import resample_field
    grid = make_grid(60.0, 3001)
    p = resample_field(profile.field, grid)
    u = complex_field(grid, np.asarray(p.values, dtype=complex))
    g2 = profile.report.h1dot ** 2
    for R in (10.0, 20.0):
        f_r = localized_virial_F(u, virial_weight(R, grid))
        assert abs(f_r) <= 1e-6 * g2
