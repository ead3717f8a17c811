"""Grid construction, quadrature order, differentiation, field round trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqnls.errors import InvalidArgument, InvalidField
from cqnls.grid import (complex_field, derivative, load_field, make_grid,
                        quadrature_weights, radial_integral, real_field,
                        same_grid, save_field, volume_weights)


def test_make_grid_basics():
    g = make_grid(10.0, 101)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == 10.0
    assert g.spacing == pytest.approx(0.1)
    assert len(g.nodes) == g.n
    assert not g.nodes.flags.writeable


@pytest.mark.parametrize("r_max,n", [(0.0, 100), (-3.0, 100),
                                     (math.inf, 100), (5.0, 15)])
def test_make_grid_rejects(r_max, n):
    with pytest.raises(InvalidArgument):
        make_grid(r_max, n)


def test_grid_equality_ignores_float_noise_free_fields():
    assert make_grid(7.0, 64) == make_grid(7.0, 64)
    assert make_grid(7.0, 64) != make_grid(7.0, 65)


@pytest.mark.parametrize("k", range(8))
@pytest.mark.parametrize("r_max", [1.0, 17.3])
def test_quadrature_exact_on_low_degree(k, r_max):
    # order-8 end corrections make the line rule exact through degree 7
    g = make_grid(r_max, 257)
    w = quadrature_weights(g)
    got = float(np.dot(w, g.nodes ** k))
    want = r_max ** (k + 1) / (k + 1)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-13)


@given(coeffs=st.lists(st.floats(-4, 4), min_size=1, max_size=8))
@settings(max_examples=40, deadline=None)
def test_quadrature_exact_on_random_polynomials(coeffs):
    g = make_grid(3.0, 64)
    w = quadrature_weights(g)
    vals = np.polynomial.polynomial.polyval(g.nodes, coeffs)
    got = float(np.dot(w, vals))
    want = sum(c * 3.0 ** (k + 1) / (k + 1) for k, c in enumerate(coeffs))
    assert got == pytest.approx(want, rel=1e-11, abs=1e-10)


def test_quadrature_is_order_eight():
    def err(n):
        g = make_grid(1.0, n)
        return abs(float(np.dot(quadrature_weights(g), np.sin(3.0 * g.nodes)))
                   - (1.0 - math.cos(3.0)) / 3.0)

    e1, e2 = err(33), err(65)
    assert e1 / e2 == pytest.approx(256.0, rel=0.5)


def test_radial_integral_gaussian_closed_form():
    g = make_grid(12.0, 1201)
    f = real_field(g, np.exp(-g.nodes ** 2))
    # int_{R^3} e^{-r^2} dx = pi^{3/2}
    assert radial_integral(f) == pytest.approx(math.pi ** 1.5, rel=1e-12)
    assert float(np.dot(volume_weights(g), f.values)) == pytest.approx(
        math.pi ** 1.5, rel=1e-12)


def test_radial_integral_power_zero_and_validation():
    g = make_grid(2.0, 64)
    f = real_field(g, np.ones(g.n))
    assert radial_integral(f, power=0) == pytest.approx(2.0, rel=1e-13)
    with pytest.raises(InvalidArgument):
        radial_integral(f, power=1)


def test_derivative_even_parity_origin_and_order():
    def err(n):
        g = make_grid(4.0, n)
        f = real_field(g, np.exp(-g.nodes ** 2 / 2.0))
        want = -g.nodes * f.values
        return float(np.max(np.abs(derivative(f).values - want)))

    g = make_grid(4.0, 201)
    f = real_field(g, np.exp(-g.nodes ** 2 / 2.0))
    assert derivative(f).values[0] == 0.0
    assert derivative(f).parity_hint == "odd"
    assert err(201) / err(401) == pytest.approx(16.0, rel=0.35)


def test_derivative_odd_parity_axis_value():
    g = make_grid(4.0, 401)
    v = real_field(g, g.nodes * np.exp(-g.nodes ** 2), parity="odd")
    d = derivative(v)
    # v = r e^{-r^2} has v'(0) = 1
    assert d.values[0] == pytest.approx(1.0, abs=1e-9)
    assert d.parity_hint == "even"


def test_field_validation():
    g = make_grid(2.0, 64)
    with pytest.raises(InvalidArgument):
        real_field(g, np.ones(10))
    with pytest.raises(InvalidArgument):
        real_field(g, np.ones(g.n), parity="sideways")
    bad = real_field(g, np.full(g.n, math.nan))
    with pytest.raises(InvalidField):
        bad.require_finite()


def test_field_values_frozen():
    g = make_grid(2.0, 64)
    f = real_field(g, np.ones(g.n))
    with pytest.raises(ValueError):
        f.values[3] = 7.0


def test_save_load_round_trip_real(tmp_path):
    g = make_grid(3.0, 64)
    f = real_field(g, np.sin(g.nodes) / 3.0 + 1e-17)
    p = tmp_path / "f.txt"
    save_field(f, p)
    back = load_field(p)
    assert back.grid == g
    assert back.is_real
    np.testing.assert_array_equal(back.values, f.values)


def test_save_load_round_trip_complex(tmp_path):
    g = make_grid(3.0, 64)
    f = complex_field(g, np.exp(1j * g.nodes) * np.exp(-g.nodes))
    p = tmp_path / "f.txt"
    save_field(f, p)
    back = load_field(p)
    assert not back.is_real
    np.testing.assert_array_equal(back.values, f.values)


def test_load_rejects_missing_header(tmp_path):
    p = tmp_path / "junk.txt"
    p.write_text("0.0 1.0 0.0\n")
    with pytest.raises(InvalidArgument):
        load_field(p)


def test_same_grid_mismatch():
    a = real_field(make_grid(2.0, 64), np.zeros(64))
    b = real_field(make_grid(2.0, 65), np.zeros(65))
    with pytest.raises(InvalidArgument):
        same_grid(a, b)
