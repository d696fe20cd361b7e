import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bifree.acceptance import random_levy, random_measure
from bifree.convolution import bifree_power, moment_table
from bifree.limits import (
    LevyData,
    LevyDataError,
    accompany,
    compound_poisson_array,
    h_function,
    h_ratio,
    h_ratio_bound,
    id_from_levy_poisson_approx,
    id_law,
    id_marginal,
    id_root,
    levy_sigma_extract,
    limit_parameters,
    limit_sweep,
    normal_levy,
    poisson_law,
    poisson_levy,
    poisson_sigma_closed,
    sigma_exponential,
    two_point_jump_measure,
    wrapped_gaussian_array,
)
from bifree.measure import AtomicMeasure1D, AtomicMeasure2D, rotate
from bifree.series import Series1, div, exp_series, mul, revert
from bifree.transforms import sigma_pointwise

PTS = [(0.3 + 0.2j, -0.1 + 0.4j), (0.05, 0.6j), (-0.4 - 0.1j, 0.2)]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_exponential_sigma_reflection_symmetry(seed):
    ld = random_levy(np.random.default_rng(seed))
    for z, w in PTS:
        s = sigma_exponential(ld, z, w)
        r = sigma_exponential(ld, 1 / np.conj(z), 1 / np.conj(w))
        assert abs(r * np.conj(s) - 1) < 1e-10


def test_incompatible_levy_measures_rejected():
    rho1 = AtomicMeasure2D.finite([0.5], [0.7], [0.3])
    rho2 = AtomicMeasure2D.finite([0.5], [0.7], [0.9])
    with pytest.raises(LevyDataError):
        LevyData(rho1, rho2, 0.0)
    with pytest.raises(LevyDataError):
        LevyData(AtomicMeasure2D.zero(), AtomicMeasure2D.zero(), 0.0, 2.0)


def test_poisson_closed_form_matches_levy_form():
    mu = two_point_jump_measure()
    ld = poisson_levy(0.8, mu)
    for z, w in PTS:
        assert abs(poisson_sigma_closed(0.8, mu, z, w) - sigma_exponential(ld, z, w)) < 1e-12


def test_normal_marginal_matches_series_reversion():
    t, order = 1.3, 8
    n = order + 1
    z = Series1.variable(n)
    one = Series1.constant(1.0, n)
    inv = mul(z, exp_series((t / 2) * (div(one + z, one - z) - one)))
    inv = mul(inv, Series1.constant(np.exp(t / 2), n))
    e = revert(inv)
    psi = div(e, one - e)
    want = psi.coeffs[1:order + 1]
    got = id_marginal(normal_levy(t), 1).moments(order)[1:]
    assert np.max(np.abs(got - want)) < 1e-10


def test_levy_density_recovers_total_mass():
    t = 1.3
    dens = levy_sigma_extract(id_marginal(normal_levy(t), 1))
    assert dens.integrate() == pytest.approx(t / 2, rel=0.02)


def test_root_power_recovers_law():
    ld = random_levy(np.random.default_rng(7))
    n = 3
    root = id_root(ld, n)
    target = moment_table(id_law(ld), 3).table
    got = moment_table(bifree_power(id_law(root), n), 3).table
    assert got.max_difference(target) < 1e-9


def test_poisson_approximation_of_poisson_law_is_exact():
    mu = two_point_jump_measure()
    approx = id_from_levy_poisson_approx(poisson_levy(0.7, mu), 50)
    a = moment_table(approx.law, 3).table
    b = moment_table(poisson_law(0.7, mu), 3).table
    assert a.max_difference(b) < 1e-10


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_accompanying_rotation_keeps_sigma(seed):
    rng = np.random.default_rng(seed)
    row = [random_measure(rng) for _ in range(2)]
    z, w = np.array([0.04 + 0.03j]), np.array([-0.05j])
    for mu, nu in zip(row, accompany(row)):
        assert abs(sigma_pointwise(mu, z, w) - sigma_pointwise(nu, z, w))[0] < 1e-12


def test_accompanying_removes_small_angles():
    mu = AtomicMeasure2D.from_angles([0.05, 0.02], [-0.03, 0.01], [0.5, 0.5])
    (nu,) = accompany([mu], eps=0.5)
    assert abs(np.angle(nu.s @ nu.weights)) < 1e-3


@given(st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=4))
def test_h_function_properties(angles):
    w = np.ones(len(angles)) / len(angles)
    nu = AtomicMeasure1D.from_angles(angles, w)
    z = np.array([0.3 + 0.1j, -0.2j])
    assert np.allclose(h_function(nu, np.conj(z)), np.conj(h_function(AtomicMeasure1D.from_angles(-np.array(angles), w), z)))
    if np.sum(w * (1 - np.cos(angles))) > 1e-3:
        assert h_ratio(nu) <= h_ratio_bound(nu) + 1e-12


def test_limit_parameters_converge_for_gaussian_array():
    arr = wrapped_gaussian_array(1.0)
    ld = limit_parameters(arr, 4096)
    assert ld.a == pytest.approx(1.0, abs=1e-3)
    assert ld.rho1.mass == pytest.approx(0.5, abs=1e-3)


def test_gaussian_sweep_error_decreases():
    rep = limit_sweep(wrapped_gaussian_array(1.0), [8, 16], normal_levy(1.0), order=3)
    assert rep.monotone
    assert rep.shortcut_check < 1e-8
    assert 1.5 < rep.ratios[0] < 2.6


def test_compound_poisson_array_is_infinitesimal():
    arr = compound_poisson_array(1.0, two_point_jump_measure())
    norms = arr.check_infinitesimal([8, 16, 32])
    assert norms[0] > norms[1] > norms[2]


def test_rotation_does_not_change_power_table_modulus():
    mu = random_measure(np.random.default_rng(2))
    lam = (np.exp(0.5j), np.exp(-0.3j))
    a = moment_table(bifree_power(mu, 2), 2).table
    b = moment_table(bifree_power(rotate(mu, lam), 2), 2).table
    assert abs(abs(a[(1, 1)]) - abs(b[(1, 1)])) < 1e-10
