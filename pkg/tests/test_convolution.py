import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bifree.acceptance import random_measure
from bifree.convolution import (
    DiagnosticsError,
    bifree_convolve,
    bifree_power,
    free_convolve,
    free_law,
    free_power,
    haar_test,
    moment_table,
    opposite_convolve,
    poisson_positivity,
    psi_reconstruct,
    series_bifree_moments,
    series_free_moments,
)
from bifree.measure import (
    AtomicMeasure1D,
    AtomicMeasure2D,
    MomentTable2D,
    marginal,
    point_mass,
    product_measure,
    rotate,
)
from bifree.transforms import ClassError, atomic_law, psi2, sigma_op_pointwise

MU = AtomicMeasure2D.from_angles([0.3, -0.5, 0.9], [0.2, 0.4, -0.7], [0.5, 0.3, 0.2])
NU = AtomicMeasure2D.from_angles([-0.2, 0.6], [0.8, 0.1], [0.6, 0.4])
ORDER = 4


def _table(law, order=ORDER):
    return moment_table(law, order).table


def test_atomic_law_round_trip():
    rep = moment_table(MU, ORDER)
    assert rep.table.max_difference(MomentTable2D.from_measure(MU, ORDER)) < 1e-10


def test_psi_reconstruction_matches_direct_psi():
    law = atomic_law(MU)
    z = np.array([0.1 + 0.05j, -0.08j, 4.0 + 1.0j, 0.12])
    w = np.array([0.07, 5.0j, 0.1 - 0.02j, 3.0 - 2.0j])
    assert np.max(np.abs(psi_reconstruct(law, z, w) - psi2(MU, z, w))) < 1e-10


def test_point_mass_acts_as_rotation():
    lam = (np.exp(0.7j), np.exp(-1.2j))
    got = _table(bifree_convolve(MU, point_mass(*lam)))
    want = MomentTable2D.from_measure(rotate(MU, lam), ORDER)
    assert got.max_difference(want) < 1e-9


def test_product_measures_stay_product():
    a1 = AtomicMeasure1D.from_angles([0.2, 0.9], [0.6, 0.4])
    b1 = AtomicMeasure1D.from_angles([-0.4, 0.3], [0.3, 0.7])
    a2 = AtomicMeasure1D.from_angles([0.5, -0.1], [0.5, 0.5])
    b2 = AtomicMeasure1D.from_angles([1.0, 0.0, -0.6], [0.2, 0.5, 0.3])
    tab = _table(bifree_convolve(product_measure(a1, b1), product_measure(a2, b2)))
    m1 = free_convolve(a1, a2).moments(ORDER)
    m2 = free_convolve(b1, b2).moments(ORDER)
    for p in range(1, ORDER + 1):
        for q in range(1, ORDER + 1):
            assert abs(tab[(p, q)] - m1[p] * m2[q]) < 1e-9


def test_free_convolution_of_two_point_law_matches_series():
    nu = AtomicMeasure1D.from_angles([0.0, np.pi], [0.75, 0.25])
    got = free_convolve(nu, nu).moments(8)
    want = series_free_moments([nu, nu], 8)
    assert np.max(np.abs(got - want)) < 1e-10


def test_free_power_equals_repeated_convolution():
    nu = AtomicMeasure1D.from_angles([0.4, -1.0, 2.0], [0.5, 0.3, 0.2])
    a = free_power(nu, 3).moments(6)
    b = free_convolve(free_convolve(nu, nu), nu).moments(6)
    assert np.max(np.abs(a - b)) < 1e-12


def test_grid_engine_agrees_with_series_engine():
    tab = _table(bifree_convolve(MU, NU))
    ser = series_bifree_moments([MU, NU], ORDER)
    for p in range(ORDER + 1):
        for q in range(ORDER + 1):
            assert abs(tab[(p, q)] - ser[p, q]) < 1e-9


def test_power_report_is_valid():
    rep = moment_table(bifree_power(MU, 3), ORDER)
    assert rep.table.is_valid()
    assert rep.quadrant_mismatch < 1e-6
    assert set(rep.as_dict()) >= {"final_window_radius", "grid_radius", "quadrant_mismatch", "resamples"}


def test_mismatch_limit_is_enforced(monkeypatch):
    import bifree.convolution as conv
    monkeypatch.setattr(conv, "QUADRANT_MISMATCH_LIMIT", -1.0)
    with pytest.raises(DiagnosticsError):
        moment_table(MU, 2)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_convolution_is_commutative_and_hermitian(seed):
    rng = np.random.default_rng(seed)
    a, b = random_measure(rng), random_measure(rng)
    t1 = _table(bifree_convolve(a, b), 3)
    t2 = _table(bifree_convolve(b, a), 3)
    assert t1.max_difference(t2) < 1e-9
    assert t1.hermitian_residual() < 1e-12
    for j in (1, 2):
        m = free_convolve(marginal(a, j), marginal(b, j)).moments(3)
        for p in range(1, 4):
            idx = (p, 0) if j == 1 else (0, p)
            assert abs(t1[idx] - m[p]) < 1e-9


def test_weak_continuity_under_small_perturbation():
    base = _table(bifree_convolve(MU, NU), 3)
    nudged = AtomicMeasure2D.from_angles([0.3 + 1e-6, -0.5, 0.9], [0.2, 0.4, -0.7 - 1e-6], [0.5, 0.3, 0.2])
    assert _table(bifree_convolve(nudged, NU), 3).max_difference(base) < 1e-5


def test_poisson_integral_is_positive():
    assert poisson_positivity(bifree_convolve(MU, NU)) > 0


def test_opposite_sigma_is_pointwise_product():
    op = opposite_convolve(MU, NU)
    z, w = np.array([0.05 + 0.02j]), np.array([-0.03j])
    assert abs(op(z, w) - sigma_op_pointwise(MU, z, w) * sigma_op_pointwise(NU, z, w))[0] < 1e-15


def test_haar_test_closed_form():
    c1 = AtomicMeasure2D.from_angles([0.0, np.pi], [0.0, np.pi], [0.5, 0.5])
    c2 = AtomicMeasure2D.from_angles([0.0, np.pi / 2, np.pi, -np.pi / 2],
                                     [0.0, -np.pi / 2, np.pi, np.pi / 2], [0.25] * 4)
    res = haar_test(c1, c2, 4)
    a, b = res.m11
    assert res.table[(2, 2)] == pytest.approx((a * b) ** 2)
    assert res.table[(1, 2)] == 0
    assert not res.is_haar
    uniform_pair = AtomicMeasure2D.from_angles([0.0, np.pi / 2, np.pi, -np.pi / 2],
                                               [0.0, np.pi / 2, np.pi, -np.pi / 2], [0.25] * 4)
    assert haar_test(c1, uniform_pair, 4).is_haar
    with pytest.raises(ClassError):
        haar_test(MU, c2)


def test_free_law_rejects_other_types():
    with pytest.raises(TypeError):
        free_law([1, 2])
