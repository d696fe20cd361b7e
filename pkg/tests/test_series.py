import numpy as np
from hypothesis import given, strategies as st

from bifree.series import Series1, Series2, compose1, div, exp_series, log_series, mul, revert

coef = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def invertible(draw, order=8):
    lead = draw(st.floats(0.3, 2.0)) * draw(st.sampled_from([-1, 1]))
    rest = draw(st.lists(coef, min_size=order - 1, max_size=order - 1))
    return Series1.from_coeffs([0.0, lead] + rest, order)


@given(invertible())
def test_reversion_round_trip(f):
    g = revert(f)
    scale = 1.0 + np.max(np.abs(g.coeffs))
    ident = compose1(f, g)
    assert np.max(np.abs(ident.coeffs - Series1.variable(f.order).coeffs)) < 1e-12 * scale ** 2
    back = compose1(g, f)
    assert np.max(np.abs(back.coeffs - Series1.variable(f.order).coeffs)) < 1e-12 * scale ** 2


@given(st.lists(coef, min_size=6, max_size=6))
def test_exp_log_inverse(c):
    a = Series1.from_coeffs([0.0] + c, 6)
    e = exp_series(a)
    assert np.max(np.abs(log_series(e).coeffs - a.coeffs)) < 1e-10


@given(st.lists(coef, min_size=5, max_size=5), st.lists(coef, min_size=5, max_size=5))
def test_division_undoes_multiplication(c1, c2):
    a = Series1.from_coeffs(c1, 4)
    b = Series1.from_coeffs([1.0] + c2[1:], 4)
    assert np.max(np.abs(div(mul(a, b), b).coeffs - a.coeffs)) < 1e-10


def test_geometric_series():
    one = Series1.constant(1.0, 10)
    z = Series1.variable(10)
    g = div(one, one - z)
    assert np.allclose(g.coeffs, 1.0)


def test_two_variable_product_evaluates():
    rng = np.random.default_rng(0)
    a = Series2.from_coeffs(rng.normal(size=(4, 4)) * 0.3, 6)
    b = Series2.from_coeffs(rng.normal(size=(3, 3)) * 0.3, 6)
    z, w = 0.05 + 0.02j, -0.03j
    assert abs(mul(a, b)(z, w) - a(z, w) * b(z, w)) < 1e-8
