import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifree.measure import (
    AtomicMeasure1D,
    AtomicMeasure2D,
    MeasureError,
    MomentTable2D,
    in_class_Px,
    marginal,
    moment,
    point_mass,
    product_measure,
    reflect,
    rotate,
)

angles = st.floats(-np.pi, np.pi, allow_nan=False)
weights = st.floats(0.05, 1.0)


@st.composite
def measures(draw, max_atoms=4):
    n = draw(st.integers(1, max_atoms))
    s = draw(st.lists(angles, min_size=n, max_size=n))
    t = draw(st.lists(angles, min_size=n, max_size=n))
    w = np.array(draw(st.lists(weights, min_size=n, max_size=n)))
    return AtomicMeasure2D.from_angles(s, t, w / w.sum())


def test_point_mass_moments():
    a, b = np.exp(0.4j), np.exp(-1.1j)
    mu = point_mass(a, b)
    assert moment(mu, 3, -2) == pytest.approx(a ** 3 * np.conj(b) ** 2)


def test_non_probability_rejected():
    with pytest.raises(MeasureError):
        AtomicMeasure2D.from_angles([0.1], [0.2], [0.5])


def test_negative_weight_rejected():
    with pytest.raises(MeasureError):
        AtomicMeasure2D.from_angles([0.1, 0.2], [0.2, 0.3], [1.5, -0.5])


def test_class_membership():
    assert in_class_Px(point_mass(1, 1))
    uniform_ish = AtomicMeasure2D.from_angles([0, np.pi], [0, np.pi], [0.5, 0.5])
    assert not in_class_Px(uniform_ish)


@given(measures())
def test_table_hermitian_and_psd(mu):
    table = MomentTable2D.from_measure(mu, 3)
    assert table.hermitian_residual() < 1e-13
    assert table.min_eigenvalue() > -1e-10
    assert table.max_modulus() <= 1 + 1e-12


@given(measures())
def test_marginal_consistency(mu):
    nu1, nu2 = marginal(mu, 1), marginal(mu, 2)
    for p in range(-3, 4):
        assert abs(nu1.moment(p) - moment(mu, p, 0)) < 1e-13
        assert abs(nu2.moment(p) - moment(mu, 0, p)) < 1e-13


@given(measures())
def test_reflection_flips_second_index(mu):
    ref = reflect(mu)
    for p, q in [(1, 0), (2, -1), (1, 3)]:
        assert abs(moment(ref, p, q) - moment(mu, p, -q)) < 1e-13


@given(measures(), angles, angles)
def test_rotation_scales_moments(mu, a, b):
    lam = (np.exp(1j * a), np.exp(1j * b))
    rot = rotate(mu, lam)
    for p, q in [(1, 1), (2, -1)]:
        expected = lam[0] ** p * lam[1] ** q * moment(mu, p, q)
        assert abs(moment(rot, p, q) - expected) < 1e-12


def test_product_measure_factorizes():
    alpha = AtomicMeasure1D.from_angles([0.2, 1.0], [0.4, 0.6])
    beta = AtomicMeasure1D.from_angles([-0.3, 0.5, 2.0], [0.2, 0.5, 0.3])
    mu = product_measure(alpha, beta)
    for p, q in [(1, 1), (2, -3), (-1, 2)]:
        assert moment(mu, p, q) == pytest.approx(alpha.moment(p) * beta.moment(q), abs=1e-14)


def test_validity_report_flags_bad_table(three_atom):
    table = MomentTable2D.from_measure(three_atom, 2)
    assert table.is_valid()
    vals = table.values.copy()
    vals[table.order + 1, table.order] = 3.0
    assert not MomentTable2D(table.order, vals).is_valid()
