import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifree.measure import AtomicMeasure1D, AtomicMeasure2D, marginal, point_mass, product_measure
from bifree.transforms import (
    H2,
    AtomicFactor,
    AtomicInverseEta,
    ClassError,
    TorusPointError,
    admissible_window,
    component,
    eta,
    psi1,
    psi2,
    s_op_transform,
    s_transform,
    sigma_op_pointwise,
    sigma_pointwise,
    sigma_series,
)

MU = AtomicMeasure2D.from_angles([0.3, -0.5, 0.9], [0.2, 0.4, -0.7], [0.5, 0.3, 0.2])


def _psi_direct(mu, z, w):
    s, t = mu.s, mu.t
    terms = (1 / (1 - z * s) - 1) * (1 / (1 - w * t) - 1)
    return np.sum(mu.weights * terms)


def test_psi2_is_moment_series_in_bidisk():
    from bifree.measure import moment
    z, w = 0.2 - 0.1j, 0.15j
    direct = sum(moment(MU, p, q) * z ** p * w ** q for p in range(1, 60) for q in range(1, 60))
    assert abs(psi2(MU, z, w) - direct) < 1e-13


def test_component_labels():
    assert component(0.1, 0.2) == "DD"
    assert component(0.1, 3.0) == "DU"
    assert component(3.0, 0.1j) == "UD"
    assert component(2.0, 2.0) == "UU"


def test_torus_points_rejected():
    with pytest.raises(TorusPointError):
        psi2(MU, np.exp(0.3j), 0.1)


@given(st.floats(0.05, 3.0), st.floats(0, 2 * np.pi), st.floats(0.05, 3.0), st.floats(0, 2 * np.pi))
def test_psi2_matches_atom_sum(rz, az, rw, aw):
    if abs(rz - 1) < 0.05 or abs(rw - 1) < 0.05:
        return
    z, w = rz * np.exp(1j * az), rw * np.exp(1j * aw)
    assert abs(psi2(MU, z, w) - _psi_direct(MU, z, w)) < 1e-10 * (1 + abs(_psi_direct(MU, z, w)))


def test_psi_reflection_symmetry():
    nu = marginal(MU, 1)
    z = 0.3 + 0.4j
    # psi(1/conj z) = -1 - conj psi(z)
    assert psi1(nu, 1 / np.conj(z)) == pytest.approx(-1 - np.conj(psi1(nu, z)), abs=1e-13)


@given(st.floats(0.0, 0.3), st.floats(0, 2 * np.pi))
def test_inverse_eta_round_trip(r, a):
    nu = marginal(MU, 1)
    inv = AtomicInverseEta(nu)
    z = np.array([r * np.exp(1j * a)])
    assert abs(eta(nu, inv(z)) - z)[0] < 1e-12


def test_inverse_eta_outside_disk_by_reflection():
    nu = marginal(MU, 2)
    inv = AtomicInverseEta(nu)
    z = np.array([4.0 + 1.0j])
    assert abs(eta(nu, inv(z))[0] - z[0]) < 1e-11


def test_zero_mean_marginal_is_rejected():
    nu = AtomicMeasure1D.from_angles([0.0, np.pi], [0.5, 0.5])
    with pytest.raises(ClassError):
        AtomicInverseEta(nu)


def test_sigma_of_point_mass_is_constant():
    a, b = np.exp(0.7j), np.exp(-0.2j)
    mu = point_mass(a, b)
    pts = np.array([0.1, 0.2j, -0.15 + 0.05j])
    vals = sigma_pointwise(mu, pts, pts[::-1])
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_sigma_of_product_measure_is_one():
    alpha = AtomicMeasure1D.from_angles([0.2, 0.9], [0.6, 0.4])
    beta = AtomicMeasure1D.from_angles([-0.4, 0.3, 1.2], [0.3, 0.5, 0.2])
    mu = product_measure(alpha, beta)
    z = np.array([0.1 + 0.05j, -0.12j])
    w = np.array([0.07, 0.1 - 0.1j])
    assert np.allclose(sigma_pointwise(mu, z, w), 1.0, atol=1e-12)


def test_sigma_pointwise_agrees_with_series():
    ser = sigma_series(MU, 14)
    z, w = 0.05 + 0.02j, -0.04j
    assert abs(sigma_pointwise(MU, z, w) - ser(z, w)) < 1e-9


def test_sigma_defining_identity():
    # Sigma(z, w) z w H(y1, y2) = psi(y1, y2) at y = eta^{-1}
    fac = AtomicFactor(MU)
    z, w = np.array([0.1 - 0.03j]), np.array([0.08j])
    y1, y2 = fac.inv[0](z), fac.inv[1](w)
    lhs = sigma_pointwise(MU, z, w) * z * w * H2(MU, y1, y2)
    assert abs(lhs - psi2(MU, y1, y2))[0] < 1e-13


def test_s_transform_from_sigma():
    # S(z, w) = Sigma(z/(1+z), w/(1+w)) scaled by the marginal factors
    z, w = 0.05 + 0.01j, -0.04 + 0.02j
    s_val = s_transform(MU, z, w)
    assert np.isfinite(s_val)
    op = s_op_transform(MU, z, w)
    assert np.isfinite(op)


def test_opposite_sigma_of_point_mass():
    mu = point_mass(np.exp(0.4j), np.exp(1.3j))
    vals = sigma_op_pointwise(mu, np.array([0.1, 0.05j]), np.array([0.02, -0.1]))
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_admissible_window_is_positive():
    win = admissible_window(MU)
    assert 0 < win.r < 1
    assert win.grid_radius <= win.r / 2 + 1e-15
