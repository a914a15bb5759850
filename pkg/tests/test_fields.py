"""Coefficient fields: exact polynomial calculus and smooth windows."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bmklab.fields import (AnalyticField, PolyField, RadialPowerField,
                           as_field, complex_coords, constant, coordinate,
                           dz_part, dzbar_part, zmonomial, zpolynomial)


def test_polyfield_evaluation_and_arithmetic():
    f = PolyField(2, {(2, 0): 1.0, (0, 1): -3.0})
    x = np.array([[2.0, 1.0], [0.5, -2.0]])
    assert np.allclose(f(x), [1.0, 6.25])
    g = PolyField(2, {(1, 1): 2.0})
    assert np.allclose((f + g)(x), f(x) + g(x))
    assert np.allclose((f * g)(x), f(x) * g(x))
    assert (f - f).is_zero


def test_polyfield_partial_is_exact():
    f = PolyField(2, {(3, 1): 2.0})
    fx = f.partial(0)
    assert fx.terms == {(2, 1): 6.0}
    assert f.partial(1).terms == {(3, 0): 2.0}
    assert constant(2, 5.0).partial(0).is_zero


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=30, deadline=None)
def test_product_rule_exact(a1, a2, b1, b2):
    f = PolyField(2, {(a1, a2): 1.5})
    g = PolyField(2, {(b1, b2): -2.0 + 1j})
    lhs = (f * g).partial(0)
    rhs = f.partial(0) * g + f * g.partial(0)
    assert (lhs - rhs).is_zero


def test_zmonomial_values_and_conj():
    f = zmonomial(1, (2,), (1,))  # z^2 zbar
    x = np.array([[1.0, 1.0]])  # z = 1 + i
    z = 1 + 1j
    assert np.isclose(f(x)[0], z ** 2 * np.conj(z))
    assert np.isclose(f.conj()(x)[0], np.conj(z) ** 2 * z)


def test_zpolynomial_matches_sum():
    f = zpolynomial(2, {((1, 0), (0, 1)): 2.0, ((0, 0), (0, 0)): -1j})
    x = np.array([[0.2, 0.3, -0.1, 0.5]])
    z1, z2 = 0.2 + 0.3j, -0.1 + 0.5j
    assert np.isclose(f(x)[0], 2.0 * z1 * np.conj(z2) - 1j)


def test_wirtinger_derivatives_on_monomials():
    """d/dz and d/dzbar (0-based slot) act like polynomial derivatives."""
    f = zmonomial(1, (2,), (1,))
    x = np.array([[0.4, -0.7]])
    z = 0.4 - 0.7j
    assert np.isclose(dz_part(f, 0)(x)[0], 2 * z * np.conj(z))
    assert np.isclose(dzbar_part(f, 0)(x)[0], z ** 2)
    # holomorphic monomials are dzbar-closed
    h = zmonomial(2, (1, 2), (0, 0))
    assert dzbar_part(h, 0).is_zero and dzbar_part(h, 1).is_zero


def test_complex_coords_slots():
    x = np.array([[1.0, 2.0, 3.0, 4.0]])
    z = complex_coords(x, 2)
    assert np.isclose(z[0, 0], 1 + 2j) and np.isclose(z[0, 1], 3 + 4j)


def test_analytic_field_fd_gradient():
    f = AnalyticField(2, lambda x: np.sin(x[:, 0]) * np.exp(x[:, 1]))
    x = np.array([[0.3, -0.2]])
    want = np.cos(0.3) * np.exp(-0.2)
    assert np.isclose(f.partial(0)(x)[0], want, atol=1e-8)


def test_radial_power_field_support_and_value():
    w = RadialPowerField(2, 2.0, radius=0.5, center=[0.25, 0.0])
    inside = np.array([[0.25, 0.1]])
    outside = np.array([[0.9, 0.9]])
    u = (0.1 / 0.5) ** 2
    assert np.isclose(w(inside)[0], (1 - u) ** 2)
    assert w(outside)[0] == 0.0


def test_negative_exponent_radial_field_interior_only():
    w = RadialPowerField(2, -0.25)
    x = np.array([[0.6, 0.0]])
    assert np.isclose(w(x)[0], (1 - 0.36) ** -0.25)


def test_coordinate_and_as_field():
    c = coordinate(3, 1)
    x = np.array([[1.0, 2.0, 3.0]])
    assert np.isclose(c(x)[0], 2.0)
    s = as_field(2.5, 3)
    assert np.isclose(s(x)[0], 2.5)
    assert as_field(c, 3) is c


def test_scalar_multiplication_and_negation():
    f = PolyField(1, {(1,): 1.0})
    x = np.array([[2.0]])
    assert np.isclose((2.0 * f)(x)[0], 4.0)
    assert np.isclose((-f)(x)[0], -2.0)
