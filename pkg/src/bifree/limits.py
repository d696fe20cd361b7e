"""Infinitesimal arrays, limit laws and infinitely divisible laws on the torus.

An infinitely divisible law in the class with nonzero means is described by
Levy data ``(rho1, rho2, a, gamma1, gamma2)``: two finite torus measures with
``(1 - Re t) d rho1 = (1 - Re s) d rho2``, a real number and two unit complex
numbers.  Its Sigma-transform is ``exp(f F)`` with

    f(z, w) = (1 - z w) / ((1 - z)(1 - w))

    F(z, w) = int k(z, s) k(w, t) (1 - Re t) d rho1
              - i int k(z, s) Im t d rho1 - i int k(w, t) Im s d rho2 - a

where ``k(z, x) = (1 + z x) / (1 - z x)``, and its marginal inverse
eta-transforms are ``gamma_j z exp(int k(z, x) d sigma_j(x))`` with
``sigma_j`` the j-th marginal of ``rho_j``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .convolution import (
    DEFAULT_GRID,
    FreeLaw1D,
    as_law,
    bifree_convolve,
    bifree_power,
    moment_table,
    rotation_law,
)
from .measure import (
    MERGE_TOL,
    AtomicMeasure1D,
    AtomicMeasure2D,
    MeasureError,
    MomentTable2D,
    infinitesimality_norm,
    marginal,
    moment,
    principal_angle,
    rotate,
)
from .transforms import (
    ClassError,
    DomainWindow,
    ExponentialInverseEta,
    PoleError,
    TransformError,
    TransformLaw,
    reject_torus,
)

LOGGER = logging.getLogger(__name__)

COMPATIBILITY_TOL = 1e-10
DEFAULT_EPS = 1.0


class LevyDataError(TransformError):
    """Levy data violating the compatibility condition."""


# ----------------------------------------------------------------------------
# Levy data


def _same_point(s1, t1, s2, t2) -> bool:
    return (abs(principal_angle(s1 - s2)) < MERGE_TOL) and (abs(principal_angle(t1 - t2)) < MERGE_TOL)


def _weighted_atoms(rho: AtomicMeasure2D, factor: np.ndarray):
    return list(zip(rho.s_angles, rho.t_angles, rho.weights * factor))


def compatibility_residual(rho1: AtomicMeasure2D, rho2: AtomicMeasure2D) -> float:
    """Largest atom-weight difference between ``(1 - Re t) rho1`` and ``(1 - Re s) rho2``."""
    left = _weighted_atoms(rho1, 1.0 - np.cos(rho1.t_angles))
    right = _weighted_atoms(rho2, 1.0 - np.cos(rho2.s_angles))
    used = [False] * len(right)
    worst = 0.0
    for s, t, wl in left:
        match = 0.0
        for idx, (s2, t2, wr) in enumerate(right):
            if not used[idx] and _same_point(s, t, s2, t2):
                used[idx] = True
                match = wr
                break
        worst = max(worst, abs(wl - match))
    for idx, (_, _, wr) in enumerate(right):
        if not used[idx]:
            worst = max(worst, abs(wr))
    return worst


@dataclass(frozen=True)
class LevyData:
    """Parameters of an infinitely divisible law on the torus."""

    rho1: AtomicMeasure2D
    rho2: AtomicMeasure2D
    a: float
    gamma1: complex = 1.0 + 0j
    gamma2: complex = 1.0 + 0j

    def __post_init__(self):
        for g in (self.gamma1, self.gamma2):
            if abs(abs(g) - 1.0) > 1e-12:
                raise LevyDataError("gamma parameters must have unit modulus")
        if not np.isfinite(self.a):
            raise LevyDataError("a must be a finite real number")
        res = compatibility_residual(self.rho1, self.rho2)
        if res > COMPATIBILITY_TOL:
            raise LevyDataError(f"incompatible Levy measures: atom weight mismatch {res:.3e}")

    @classmethod
    def zero(cls, gamma1: complex = 1.0, gamma2: complex = 1.0) -> "LevyData":
        return cls(AtomicMeasure2D.zero(), AtomicMeasure2D.zero(), 0.0, gamma1, gamma2)

    @property
    def sigma1(self) -> AtomicMeasure1D:
        return marginal(self.rho1, 1)

    @property
    def sigma2(self) -> AtomicMeasure1D:
        return marginal(self.rho2, 2)

    def sigma(self, j: int) -> AtomicMeasure1D:
        return self.sigma1 if j == 1 else self.sigma2

    def gamma(self, j: int) -> complex:
        return self.gamma1 if j == 1 else self.gamma2

    def joint(self) -> AtomicMeasure2D:
        """The common measure ``(1 - Re t) d rho1``."""
        return AtomicMeasure2D.finite(
            self.rho1.s_angles, self.rho1.t_angles, self.rho1.weights * (1.0 - np.cos(self.rho1.t_angles))
        )


def normal_levy(a: float) -> LevyData:
    """Data of the normal law ``N(a)``: ``rho1 = rho2 = (|a|/2) delta_(1,1)``."""
    rho = AtomicMeasure2D.finite([0.0], [0.0], [abs(a) / 2.0]) if a else AtomicMeasure2D.zero()
    return LevyData(rho, rho, float(a))


def poisson_levy(r: float, mu: AtomicMeasure2D) -> LevyData:
    """Data of the compound Poisson law with rate ``r`` and jump law ``mu``."""
    if r < 0:
        raise LevyDataError("rate must be nonnegative")
    w = r * mu.weights
    rho1 = AtomicMeasure2D.finite(mu.s_angles, mu.t_angles, w * (1.0 - np.cos(mu.s_angles)))
    rho2 = AtomicMeasure2D.finite(mu.s_angles, mu.t_angles, w * (1.0 - np.cos(mu.t_angles)))
    a = float(np.sum(w * np.sin(mu.s_angles) * np.sin(mu.t_angles)))
    g1 = np.exp(-1j * np.sum(w * np.sin(mu.s_angles)))
    g2 = np.exp(-1j * np.sum(w * np.sin(mu.t_angles)))
    return LevyData(rho1, rho2, a, complex(g1), complex(g2))


# ----------------------------------------------------------------------------
# kernels


def f_kernel(z, w):
    """``(1 - z w) / ((1 - z)(1 - w))``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(z == 1.0) or np.any(w == 1.0):
        raise PoleError("f has a pole at z = 1 or w = 1")
    return (1.0 - z * w) / ((1.0 - z) * (1.0 - w))


def _k(z, x):
    zx = z[..., None] * x
    return (1.0 + zx) / (1.0 - zx)


def F_function(ld: LevyData, z, w):
    """The function ``F`` attached to Levy data (exact atom sums)."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    reject_torus(z, w)
    r1, r2 = ld.rho1, ld.rho2
    out = np.full(z.shape, -ld.a, dtype=complex)
    if len(r1):
        ks = _k(z, r1.s)
        kt = _k(w, r1.t)
        out = out + (ks * kt) @ (r1.weights * (1.0 - np.cos(r1.t_angles)))
        out = out - 1j * (ks @ (r1.weights * np.sin(r1.t_angles)))
    if len(r2):
        out = out - 1j * (_k(w, r2.t) @ (r2.weights * np.sin(r2.s_angles)))
    return out


def sigma_exponential(ld: LevyData, z, w):
    """``exp(f(z, w) F(z, w))``."""
    return np.exp(f_kernel(z, w) * F_function(ld, z, w))


def poisson_sigma_closed(r: float, mu: AtomicMeasure2D, z, w):
    """Single-integral form of the compound Poisson Sigma-transform."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    s, t = mu.s, mu.t
    zs = z[..., None] * s
    wt = w[..., None] * t
    integrand = (1.0 - (z * w)[..., None]) * (1.0 - s) * (1.0 - t) / ((1.0 - zs) * (1.0 - wt))
    return np.exp(integrand @ (r * mu.weights))


class ExponentialFactor:
    """Transform factor of an infinitely divisible law."""

    kind = "exponential"

    def __init__(self, ld: LevyData):
        self.ld = ld
        self.inv = (
            ExponentialInverseEta(ld.gamma1, ld.sigma1),
            ExponentialInverseEta(ld.gamma2, ld.sigma2),
        )

    def sigma_from(self, e1, e2, y1=None, y2=None):
        return sigma_exponential(self.ld, e1, e2)

    def sigma(self, z, w):
        return sigma_exponential(self.ld, z, w)


def id_law(ld: LevyData) -> TransformLaw:
    """Transform-presented infinitely divisible law with the given Levy data."""
    fac = ExponentialFactor(ld)
    if abs(fac.sigma(0.0, 0.0)) == 0.0:
        raise ClassError("Sigma(0, 0) vanishes")
    return TransformLaw(((fac, 1),), DomainWindow(0.5), "id", {"levy": ld})


def normal_law(a: float) -> TransformLaw:
    return id_law(normal_levy(a))


def poisson_law(r: float, mu: AtomicMeasure2D) -> TransformLaw:
    return id_law(poisson_levy(r, mu))


def id_marginal(ld: LevyData, j: int) -> FreeLaw1D:
    return FreeLaw1D(((ExponentialInverseEta(ld.gamma(j), ld.sigma(j)), 1),), DomainWindow(0.5), "id-marginal")


def id_root(ld: LevyData, n: int) -> LevyData:
    """Data of an n-th convolution root: measures and ``a`` divided by ``n``,
    principal n-th roots of the gamma parameters."""
    if n < 1:
        raise ValueError("n must be a positive integer")

    def scaled(rho):
        return AtomicMeasure2D.finite(rho.s_angles, rho.t_angles, rho.weights / n)

    def root(g):
        return complex(np.exp(1j * np.angle(g) / n))

    return LevyData(scaled(ld.rho1), scaled(ld.rho2), ld.a / n, root(ld.gamma1), root(ld.gamma2))


# ----------------------------------------------------------------------------
# Poisson approximation of a general infinitely divisible Sigma


@dataclass
class PoissonApproximation:
    m: int
    rate: float
    jump: AtomicMeasure2D | None
    a_part: float
    law: TransformLaw


def id_from_levy_poisson_approx(ld: LevyData, m: int) -> PoissonApproximation:
    """Law ``Poi(r_m, mu_m) (x) N(a - a_m)`` built from the part of
    ``rho = (1 - Re t) d rho1`` living on ``A_m x A_m``, ``A_m = {1/m < |theta| <= pi}``.

    When ``rho`` vanishes the normal law ``N(a)`` is returned.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    rho = ld.joint()
    if rho.mass == 0.0:
        off1 = np.abs(principal_angle(ld.rho1.t_angles)) > MERGE_TOL
        off2 = np.abs(principal_angle(ld.rho2.s_angles)) > MERGE_TOL
        if np.any(ld.rho1.weights[off1] > 0) or np.any(ld.rho2.weights[off2] > 0):
            raise LevyDataError("rho vanishes but rho_j charges points off the allowed slices")
        return PoissonApproximation(m, 0.0, None, ld.a, normal_law(ld.a))
    keep = (np.abs(rho.s_angles) > 1.0 / m) & (np.abs(rho.t_angles) > 1.0 / m)
    dens = rho.weights[keep] / ((1.0 - np.cos(rho.s_angles[keep])) * (1.0 - np.cos(rho.t_angles[keep])))
    rate = float(dens.sum())
    if rate == 0.0:
        return PoissonApproximation(m, 0.0, None, ld.a, normal_law(ld.a))
    jump = AtomicMeasure2D.from_angles(rho.s_angles[keep], rho.t_angles[keep], dens / rate)
    a_m = float(np.sum(dens * np.sin(rho.s_angles[keep]) * np.sin(rho.t_angles[keep])))
    law = bifree_convolve(poisson_law(rate, jump), normal_law(ld.a - a_m))
    return PoissonApproximation(m, rate, jump, ld.a - a_m, law)


# ----------------------------------------------------------------------------
# infinitesimal arrays


def centering_constant(nu: AtomicMeasure1D, eps: float = DEFAULT_EPS) -> complex:
    """``exp(i int_{|arg x| < eps} arg x d nu(x))``."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    ang = principal_angle(nu.angles)
    inside = np.abs(ang) < eps
    return complex(np.exp(1j * np.sum(ang[inside] * nu.weights[inside])))


def centering_pair(mu: AtomicMeasure2D, eps: float = DEFAULT_EPS) -> tuple[complex, complex]:
    return centering_constant(marginal(mu, 1), eps), centering_constant(marginal(mu, 2), eps)


def accompany(row: Sequence[AtomicMeasure2D], eps: float = DEFAULT_EPS) -> list[AtomicMeasure2D]:
    """Rotate every measure of a row so that its truncated mean argument vanishes."""
    out = []
    for mu in row:
        b1, b2 = centering_pair(mu, eps)
        out.append(rotate(mu, (1.0 / b1, 1.0 / b2)))
    return out


def h_function(nu: AtomicMeasure1D, z):
    """``int (1 - z)(1 - x) / (1 - z x) d nu(x)``."""
    z = np.asarray(z, dtype=complex)
    reject_torus(z)
    x = nu.points
    return ((1.0 - z)[..., None] * (1.0 - x) / (1.0 - z[..., None] * x)) @ nu.weights


def h_ratio_bound(nu: AtomicMeasure1D) -> float:
    """A constant ``M`` with ``|Im h| <= M Re h`` on the disk of radius 1/2.

    On ``|z| <= 1/2`` the kernel ``k(z, x)`` satisfies ``Re k >= 1/3`` and
    ``|k| <= 3``, and ``h(z) = int [k(z, x)(1 - Re x) - i Im x] d nu``, so
    ``M = 9 + 3 |int Im x d nu| / int (1 - Re x) d nu`` works.
    """
    spread = float(np.sum(nu.weights * (1.0 - np.cos(nu.angles))))
    if spread == 0.0:
        raise ValueError("the bound is void for the point mass at 1")
    drift = abs(float(np.sum(nu.weights * np.sin(nu.angles))))
    return 9.0 + 3.0 * drift / spread


def h_ratio(nu: AtomicMeasure1D, radius: float = 0.5, n_r: int = 16, n_theta: int = 64) -> float:
    """Largest ``|Im h| / Re h`` over a polar grid of the closed disk of given radius."""
    rr = np.linspace(radius / n_r, radius, n_r)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    z = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
    h = h_function(nu, z)
    return float(np.max(np.abs(h.imag) / h.real))


RowSource = Callable[[int], tuple]


@dataclass
class InfinitesimalArray:
    """Triangular array of torus measures with rotations.

    ``source(n)`` returns ``(measures, lam)`` for level ``n``; ``measures`` is
    either a list of measures or a pair ``(mu, k)`` meaning ``k`` copies of
    ``mu``.
    """

    source: RowSource
    eps: float = DEFAULT_EPS
    name: str = "array"
    _cache: dict = field(default_factory=dict, repr=False)

    def row(self, n: int):
        if n not in self._cache:
            self._cache[n] = self.source(n)
        return self._cache[n]

    def row_list(self, n: int) -> list[AtomicMeasure2D]:
        measures, _ = self.row(n)
        if isinstance(measures, tuple):
            mu, k = measures
            return [mu] * k
        return list(measures)

    def check_infinitesimal(self, levels: Sequence[int], eps: float = 0.5) -> list[float]:
        norms = []
        for n in levels:
            measures, _ = self.row(n)
            sample = [measures[0]] if isinstance(measures, tuple) else measures
            norms.append(infinitesimality_norm(sample, eps))
        if any(b > a + 1e-15 for a, b in zip(norms, norms[1:])):
            warnings.warn("infinitesimality norm increases along the stored rows", stacklevel=2)
        return norms


def wrapped_gaussian_array(r: float = 1.0) -> InfinitesimalArray:
    """Rows of ``n`` copies of the law of ``(xi, xi)`` or ``(conj xi, conj xi)`` with equal
    probability, ``xi = sqrt(1 - r/n) + i sqrt(r/n)``; the limit is ``N(r)``."""

    def source(n):
        if n <= r:
            raise ValueError("level must exceed the rate")
        xi = np.sqrt(1 - r / n) + 1j * np.sqrt(r / n)
        mu = AtomicMeasure2D.from_points([xi, np.conj(xi)], [xi, np.conj(xi)], [0.5, 0.5])
        return (mu, n), (1.0 + 0j, 1.0 + 0j)

    return InfinitesimalArray(source, 1.0, f"wrapped-gaussian(r={r})")


def compound_poisson_array(r: float, mu: AtomicMeasure2D) -> InfinitesimalArray:
    """Rows of ``n`` copies of ``(1 - r/n) delta_(1,1) + (r/n) mu``; the limit is ``Poi(r, mu)``."""

    def source(n):
        if n <= r:
            raise ValueError("level must exceed the rate")
        s = np.concatenate([[0.0], mu.s_angles])
        t = np.concatenate([[0.0], mu.t_angles])
        w = np.concatenate([[1.0 - r / n], (r / n) * mu.weights])
        return (AtomicMeasure2D.from_angles(s, t, w), n), (1.0 + 0j, 1.0 + 0j)

    return InfinitesimalArray(source, 1.0, f"compound-poisson(r={r})")


def constant_array(point=(1.0 + 0j, 1.0 + 0j)) -> InfinitesimalArray:
    """Rows of ``n`` point masses at ``point``."""
    from .measure import point_mass

    def source(n):
        return (point_mass(*point), n), (1.0 + 0j, 1.0 + 0j)

    return InfinitesimalArray(source, 1.0, "constant")


def two_point_jump_measure() -> AtomicMeasure2D:
    """``(delta_(i,-1) + delta_(-i,-1)) / 2``."""
    return AtomicMeasure2D.from_points([1j, -1j], [-1.0, -1.0], [0.5, 0.5])


def limit_parameters(array: InfinitesimalArray, n: int) -> LevyData:
    """Finite-level sums whose limits are the Levy data of the limit law."""
    measures, lam = array.row(n)
    if isinstance(measures, tuple):
        base, k = measures
        group = [(base, k)]
    else:
        group = [(mu, 1) for mu in measures]
    s_all, t_all, w1_all, w2_all = [], [], [], []
    a_sum = 0.0
    phase = np.zeros(2)
    for mu, k in group:
        b1, b2 = centering_pair(mu, array.eps)
        nu = rotate(mu, (1.0 / b1, 1.0 / b2))
        s_all.append(nu.s_angles)
        t_all.append(nu.t_angles)
        w1_all.append(k * nu.weights * (1.0 - np.cos(nu.s_angles)))
        w2_all.append(k * nu.weights * (1.0 - np.cos(nu.t_angles)))
        a_sum += k * float(np.sum(nu.weights * np.sin(nu.s_angles) * np.sin(nu.t_angles)))
        phase[0] += k * (float(np.sum(nu.weights * np.sin(nu.s_angles))) + np.angle(b1))
        phase[1] += k * (float(np.sum(nu.weights * np.sin(nu.t_angles))) + np.angle(b2))
    s = np.concatenate(s_all)
    t = np.concatenate(t_all)
    rho1 = AtomicMeasure2D.finite(s, t, np.concatenate(w1_all))
    rho2 = AtomicMeasure2D.finite(s, t, np.concatenate(w2_all))
    g1 = np.conj(lam[0]) * np.exp(-1j * phase[0])
    g2 = np.conj(lam[1]) * np.exp(-1j * phase[1])
    return LevyData(rho1, rho2, a_sum, complex(g1), complex(g2))


def row_law(array: InfinitesimalArray, n: int, shortcut: bool = True) -> TransformLaw:
    """``delta_lam (x) mu_n1 (x) ... (x) mu_nk`` as a transform-presented law.

    With ``shortcut`` identical rows are a single factor of multiplicity ``k``;
    otherwise each copy is a separate factor, as pairwise convolution would build it.
    """
    measures, lam = array.row(n)
    if isinstance(measures, tuple) and shortcut:
        mu, k = measures
        law = bifree_power(mu, k)
    else:
        items = array.row_list(n)
        law = as_law(items[0])
        for mu in items[1:]:
            law = bifree_convolve(law, mu)
    if abs(lam[0] - 1) > 0 or abs(lam[1] - 1) > 0:
        law = bifree_convolve(rotation_law(lam), law)
    return law


@dataclass
class SweepReport:
    levels: list
    errors: list
    ratios: list
    monotone: bool
    shortcut_check: float

    def rows(self):
        for n, e in zip(self.levels, self.errors):
            yield n, e


def limit_sweep(array: InfinitesimalArray, levels: Sequence[int], target: LevyData,
                order: int = 4, grid: int = DEFAULT_GRID, validate_shortcut: bool = True) -> SweepReport:
    """Moment-table distance between level-n convolutions and the limit law.

    ``ratios`` holds ``err(n) / err(n')`` for consecutive levels; when levels
    double, a ratio near 2 indicates an error of order ``1/n``.
    """
    ref = moment_table(id_law(target), order, grid=grid).table
    errors = []
    for n in levels:
        tab = moment_table(row_law(array, n), order, grid=grid).table
        errors.append(tab.max_difference(ref))
        LOGGER.info("level %d: max moment error %.3e", n, errors[-1])
    ratios = [a / b if b > 0 else float("inf") for a, b in zip(errors, errors[1:])]
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    check = 0.0
    if validate_shortcut and levels:
        n0 = min(levels)
        fast = moment_table(row_law(array, n0, True), order, grid=grid).table
        slow = moment_table(row_law(array, n0, False), order, grid=grid).table
        check = fast.max_difference(slow)
        if check > 1e-8:
            raise TransformError(f"power shortcut disagrees with pairwise convolution by {check:.3e}")
    return SweepReport(list(levels), errors, ratios, monotone, check)


# ----------------------------------------------------------------------------
# boundary data of infinitely divisible marginals


@dataclass
class LevyDensity:
    angles: np.ndarray  # angles of the points x = exp(-i theta)
    density: np.ndarray  # density with respect to d theta
    r: float

    def integrate(self, func=None) -> float:
        """Integral of ``func(x)`` against the approximant (trapezoid on a periodic grid)."""
        vals = self.density if func is None else self.density * func(np.exp(1j * self.angles))
        return float(np.real(np.sum(vals)) * (2 * np.pi / len(self.angles)))


def levy_sigma_extract(fl: FreeLaw1D, r: float = 0.995, n_theta: int = 8192) -> LevyDensity:
    """Finite-radius approximant ``(1/2pi) log(|eta^{-1}(r e^{i theta})| / r)`` of the Levy measure."""
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = fl.eta_inv(r * np.exp(1j * theta))
    dens = np.log(np.abs(vals) / r) / (2 * np.pi)
    return LevyDensity(principal_angle(-theta), dens, r)


def levy_gamma(mean: complex) -> complex:
    """Rotation parameter ``|m| / m`` from the mean of an infinitely divisible marginal."""
    if mean == 0:
        raise ClassError("mean vanishes")
    return complex(abs(mean) / mean)


# ----------------------------------------------------------------------------
# convergence to the uniform law


@dataclass
class HaarLimitReport:
    levels: list
    powers: list  # rows (|m11|^k, |m1|^k, |m2|^k)
    tends_to_zero: bool
    envelopes: list
    moment_maxima: list

    def as_records(self):
        out = []
        for i, n in enumerate(self.levels):
            rec = {
                "level": n,
                "m11_power": self.powers[i][0],
                "mean1_power": self.powers[i][1],
                "mean2_power": self.powers[i][2],
                "envelope": self.envelopes[i],
            }
            if i < len(self.moment_maxima) and self.moment_maxima[i] is not None:
                rec["max_moment"] = self.moment_maxima[i]
            out.append(rec)
        return out


def haar_limit_check(measures, ks: Sequence[int], levels: Sequence[int] | None = None,
                     tol: float = 1e-6, pipeline_max: int = 32, order: int = 2,
                     grid: int = DEFAULT_GRID) -> HaarLimitReport:
    """Power sequences ``|m11(mu_n)|^k_n`` and ``|m(mu_n^(j))|^k_n`` and, for
    ``k_n <= pipeline_max``, the largest nontrivial moment of ``mu_n^{k_n}``.

    ``measures`` is a single measure (used at every level) or a sequence.
    """
    if isinstance(measures, AtomicMeasure2D):
        measures = [measures] * len(ks)
    if levels is None:
        levels = list(ks)
    powers, envelopes, maxima = [], [], []
    for mu, k in zip(measures, ks):
        vals = (abs(moment(mu, 1, 1)) ** k, abs(moment(mu, 1, 0)) ** k, abs(moment(mu, 0, 1)) ** k)
        powers.append(vals)
        envelopes.append(max(vals))
        if k <= pipeline_max:
            tab = moment_table(bifree_power(mu, k), order, grid=grid).table
            v = np.abs(tab.values).copy()
            v[order, order] = 0.0
            maxima.append(float(v.max()))
        else:
            maxima.append(None)
    last = powers[-1]
    decreasing = all(
        all(b[i] <= a[i] * (1 + 1e-12) for i in range(3)) for a, b in zip(powers, powers[1:])
    )
    tends = decreasing and max(last) <= tol
    return HaarLimitReport(list(levels), powers, bool(tends), envelopes, maxima)


def moment_distance(a: MomentTable2D, b: MomentTable2D, order: int | None = None) -> float:
    return a.max_difference(b, order)


__all__ = [
    "LevyData",
    "LevyDataError",
    "InfinitesimalArray",
    "ExponentialFactor",
    "accompany",
    "centering_constant",
    "compatibility_residual",
    "F_function",
    "f_kernel",
    "h_function",
    "h_ratio",
    "h_ratio_bound",
    "haar_limit_check",
    "id_from_levy_poisson_approx",
    "id_law",
    "id_marginal",
    "id_root",
    "levy_gamma",
    "levy_sigma_extract",
    "limit_parameters",
    "limit_sweep",
    "normal_law",
    "normal_levy",
    "poisson_law",
    "poisson_levy",
    "poisson_sigma_closed",
    "sigma_exponential",
    "wrapped_gaussian_array",
    "compound_poisson_array",
    "constant_array",
    "two_point_jump_measure",
    "MeasureError",
]
