"""Pointwise and series evaluation of the integral transforms of torus measures.

Conventions
-----------
For a circle measure ``nu`` and a torus measure ``mu``::

    psi_nu(z)    = int z x / (1 - z x) dnu(x)
    eta_nu(z)    = psi_nu(z) / (1 + psi_nu(z))
    psi_mu(z, w) = int z s / (1 - z s) * w t / (1 - w t) dmu(s, t)
    H_mu(z, w)   = int 1 / ((1 - z s)(1 - w t)) dmu(s, t)

and the bivariate multiplicative transform

    Sigma_mu(z, w) = psi_mu(y1, y2) / (z w H_mu(y1, y2)),   yj = eta_j^{-1}(.)

where ``eta_j`` is the eta-transform of the j-th marginal.  ``Sigma`` lives on
the four-component domain ``(D_r u Delta_r)^2``; the component of a point is
tagged DD, DU, UD or UU (D: inside the unit disk, U: outside).

Values on unbounded components are never obtained by a Newton solve outside
the unit disk.  The inverse eta-transform uses ``eta^{-1}(z) = 1/conj(eta^{-1}(1/conj z))``
and ``Sigma`` on UD and UU uses ``Sigma(z, w) = 1/conj(Sigma(1/conj z, 1/conj w))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .measure import (
    PX_THRESHOLD,
    AtomicMeasure1D,
    AtomicMeasure2D,
    in_class_Px,
    marginal,
    moment,
)
from .series import Series1, Series2, div, revert, substitute2

LOGGER = logging.getLogger(__name__)

TORUS_BAND = 1e-9
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50
CONTINUATION_STEPS = 10
DENOMINATOR_MARGIN = 0.1
WINDOW_START = 0.5
WINDOW_MIN = 1.0 / 256


class TransformError(ValueError):
    """Domain error raised by a transform evaluation."""


class TorusPointError(TransformError):
    """Evaluation requested on (or too close to) the unit circle."""


class PoleError(TransformError):
    """A transform denominator vanishes at the requested point."""


class WindowError(TransformError):
    """Newton inversion failed: the working radius is too large."""


class ClassError(TransformError):
    """The measure does not have the nonzero means the transforms require."""


def _as_c(z):
    return np.asarray(z, dtype=complex)


def reject_torus(*points):
    for z in points:
        a = np.abs(_as_c(z))
        if np.any(np.abs(a - 1.0) < TORUS_BAND):
            raise TorusPointError("evaluation point lies on the unit circle")


def component(z, w) -> str:
    """Component tag of the point ``(z, w)``: DD, DU, UD or UU."""
    reject_torus(z, w)
    return ("D" if abs(z) < 1 else "U") + ("D" if abs(w) < 1 else "U")


def reflect_point(z):
    """The map ``z -> 1/conj(z)``."""
    z = _as_c(z)
    return 1.0 / np.conj(z)


# ----------------------------------------------------------------------------
# one-variable transforms of atomic measures


def _kernel(z, x):
    # z x / (1 - z x), written so that it stays accurate for |z| large
    zx = z[..., None] * x
    return zx / (1.0 - zx)


def psi1(nu: AtomicMeasure1D, z):
    """The psi-transform of a circle measure."""
    z = _as_c(z)
    reject_torus(z)
    return _kernel(z, nu.points) @ nu.weights


def psi1_prime(nu: AtomicMeasure1D, z):
    z = _as_c(z)
    x = nu.points
    return (x / (1.0 - z[..., None] * x) ** 2) @ nu.weights


def eta(nu: AtomicMeasure1D, z):
    """The eta-transform ``psi / (1 + psi)``."""
    p = psi1(nu, z)
    den = 1.0 + p
    if np.any(den == 0):
        raise PoleError("1 + psi vanishes: eta has a pole here")
    return p / den


def eta_prime(nu: AtomicMeasure1D, z):
    z = _as_c(z)
    p = psi1(nu, z)
    return psi1_prime(nu, z) / (1.0 + p) ** 2


def h_transform(nu: AtomicMeasure1D, z):
    """``int (1 - z)(1 - x) / (1 - z x) dnu(x)``."""
    z = _as_c(z)
    reject_torus(z)
    x = nu.points
    num = (1.0 - z[..., None]) * (1.0 - x)
    return (num / (1.0 - z[..., None] * x)) @ nu.weights


# ----------------------------------------------------------------------------
# two-variable transforms of atomic measures


def _pair_kernels(mu: AtomicMeasure2D, z, w):
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    zs = z[..., None] * mu.s
    wt = w[..., None] * mu.t
    return zs, wt


def psi2(mu: AtomicMeasure2D, z, w):
    """The bivariate psi-transform."""
    reject_torus(z, w)
    zs, wt = _pair_kernels(mu, z, w)
    return (zs / (1.0 - zs) * wt / (1.0 - wt)) @ mu.weights


def H2(mu: AtomicMeasure2D, z, w):
    """``int 1 / ((1 - z s)(1 - w t)) dmu``."""
    reject_torus(z, w)
    zs, wt = _pair_kernels(mu, z, w)
    return (1.0 / ((1.0 - zs) * (1.0 - wt))) @ mu.weights


# ----------------------------------------------------------------------------
# inverse eta-transforms


@dataclass(frozen=True)
class DomainWindow:
    """Working radius ``r`` defining ``Omega_r = (D_r u Delta_r)^2``."""

    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError("window radius must lie in (0, 1)")

    def contains(self, z) -> np.ndarray:
        a = np.abs(_as_c(z))
        return (a < self.r) | (a > 1.0 / self.r)

    @property
    def grid_radius(self) -> float:
        """Largest radius on which reconstruction of psi is used (half the window)."""
        return self.r / 2.0


def newton_eta(nu: AtomicMeasure1D, target, guess, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Solve ``eta_nu(y) = target`` by Newton's method from ``guess``.

    Returns ``(y, converged)`` arrays.
    """
    target = _as_c(target)
    y = np.array(_as_c(guess), dtype=complex, copy=True)
    done = np.zeros(y.shape, dtype=bool)
    scale = np.maximum(np.abs(target), 1e-300)
    for _ in range(maxiter):
        active = ~done
        if not np.any(active):
            break
        ya = y[active]
        with np.errstate(all="ignore"):
            resid = eta(nu, ya) - target[active]
            step = resid / eta_prime(nu, ya)
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        ya = ya - step
        y[active] = ya
        ok = (np.abs(step) <= tol * np.maximum(np.abs(ya), 1e-300)) | (np.abs(resid) <= 1e-16 * scale[active])
        ok &= ~bad
        idx = np.flatnonzero(active)
        done[idx[ok]] = True
    return y, done


class AtomicInverseEta:
    """Inverse eta-transform of an atomic circle measure, by Newton continuation.

    Along each ray from 0 the target is advanced in ``CONTINUATION_STEPS``
    equal steps (so each step is at most ``0.1 r`` for ``|z| < r``); the first
    guess is ``z / m(nu)`` since ``eta'(0) = m(nu)``.
    """

    def __init__(self, nu: AtomicMeasure1D, tau: float = PX_THRESHOLD):
        self.nu = nu
        self.mean = nu.mean
        if abs(self.mean) <= tau:
            raise ClassError("circle measure has (numerically) zero mean")

    def _inside(self, z):
        out = np.zeros(z.shape, dtype=complex)
        nz = z != 0
        if not np.any(nz):
            return out
        zt = z[nz]
        y = zt / CONTINUATION_STEPS / self.mean
        for k in range(1, CONTINUATION_STEPS + 1):
            target = zt * (k / CONTINUATION_STEPS)
            if k > 1:
                # first order predictor along the ray
                with np.errstate(all="ignore"):
                    y = y + (zt / CONTINUATION_STEPS) / eta_prime(self.nu, y)
            y, ok = newton_eta(self.nu, target, y)
            if not np.all(ok):
                raise WindowError("Newton continuation for the inverse eta-transform did not converge")
        if np.any(np.abs(y) >= 1.0):
            raise WindowError("inverse eta-transform left the unit disk; shrink the window")
        out[nz] = y
        return out

    def __call__(self, z):
        z = _as_c(z)
        reject_torus(z)
        out = np.empty(z.shape, dtype=complex)
        inner = np.abs(z) < 1.0
        if np.any(inner):
            out[inner] = self._inside(z[inner])
        if np.any(~inner):
            out[~inner] = 1.0 / np.conj(self._inside(1.0 / np.conj(z[~inner])))
        return out

    def track(self, e, guess):
        """Value at ``e`` on the branch through ``guess`` (used along continuation paths)."""
        e = _as_c(e)
        y, ok = newton_eta(self.nu, e, guess)
        if not np.all(ok):
            raise WindowError("branch tracking of the inverse eta-transform failed")
        return y

    def derivative(self, e, y):
        """Derivative of the inverse at ``e`` given the value ``y``."""
        return 1.0 / eta_prime(self.nu, y)

    def ratio_at_zero(self) -> complex:
        return 1.0 / self.mean


class ExponentialInverseEta:
    """Inverse eta-transform ``gamma z exp(int (1 + x z)/(1 - x z) dsigma(x))``.

    The same expression is valid on both sides of the circle, and it satisfies
    the reflection symmetry identically.
    """

    def __init__(self, gamma: complex, sigma: AtomicMeasure1D):
        self.gamma = complex(gamma)
        self.sigma = sigma
        self.mean = np.conj(self.gamma) * np.exp(-sigma.mass)

    def _exponent(self, z):
        x = self.sigma.points
        zx = z[..., None] * x
        return ((1.0 + zx) / (1.0 - zx)) @ self.sigma.weights

    def __call__(self, z):
        z = _as_c(z)
        reject_torus(z)
        return self.gamma * z * np.exp(self._exponent(z))

    def track(self, e, guess=None):
        return self(e)

    def derivative(self, e, y=None):
        e = _as_c(e)
        x = self.sigma.points
        ex = e[..., None] * x
        dexp = (2.0 * x / (1.0 - ex) ** 2) @ self.sigma.weights
        val = self.gamma * np.exp(self._exponent(e))
        return val * (1.0 + e * dexp)

    def ratio_at_zero(self) -> complex:
        return 1.0 / self.mean


def eta_inv_pointwise(nu: AtomicMeasure1D, z, window: DomainWindow | None = None):
    """Inverse eta-transform on ``D_r u Delta_r`` by Newton continuation."""
    z = _as_c(z)
    if window is not None and not np.all(window.contains(z)):
        raise TransformError("point outside the working window")
    return AtomicInverseEta(nu)(z)


def psi_inv_pointwise(nu: AtomicMeasure1D, z, window: DomainWindow | None = None):
    """Inverse psi-transform through ``psi^{-1}(z) = eta^{-1}(z / (1 + z))``."""
    z = _as_c(z)
    return eta_inv_pointwise(nu, z / (1.0 + z), window)


# ----------------------------------------------------------------------------
# Sigma and its relatives


def _ratio(y, e, at_zero):
    with np.errstate(all="ignore"):
        r = y / e
    return np.where(e == 0, at_zero, r)


def sigma_bidisk_quotient(mu: AtomicMeasure2D, e1, e2, y1, y2, r1, r2):
    """The numerator/denominator pair on the bidisk component.

    ``f = (y1/e1)(y2/e2) int s t / ((1 - y1 s)(1 - y2 t))`` and ``g = H(y1, y2)``.
    ``r1, r2`` are the limits of ``yj/ej`` at 0.
    """
    a = 1.0 / (1.0 - y1[..., None] * mu.s)
    b = 1.0 / (1.0 - y2[..., None] * mu.t)
    f = _ratio(y1, e1, r1) * _ratio(y2, e2, r2) * ((mu.s * mu.t * a * b) @ mu.weights)
    g = (a * b) @ mu.weights
    return f, g


def sigma_mixed_quotient(mu: AtomicMeasure2D, e1, e2, y1, y2, r1):
    """Numerator/denominator pair on the component with ``e1`` bounded and ``e2`` unbounded.

    With ``v = 1/y2 = conj(eta_2^{-1}(1/conj e2))`` the denominator is
    ``G = e2 v int 1 / ((1 - y1 s)(v - t))`` which tends to -1 at ``(0, inf)``.
    """
    v = 1.0 / y2
    a = 1.0 / (1.0 - y1[..., None] * mu.s)
    c = 1.0 / (v[..., None] - mu.t)
    F = _ratio(y1, e1, r1) * ((mu.s * mu.t * a * c) @ mu.weights)
    G = e2 * v * ((a * c) @ mu.weights)
    return F, G


class AtomicFactor:
    """A torus measure in the class with nonzero means, viewed as a transform factor."""

    kind = "atomic"

    def __init__(self, mu: AtomicMeasure2D, tau: float = PX_THRESHOLD):
        if not mu.is_probability:
            raise TransformError("transform factors must be probability measures")
        if not in_class_Px(mu, tau):
            raise ClassError("measure is outside the class with nonzero means and m_{1,1}")
        self.mu = mu
        self.inv = (AtomicInverseEta(marginal(mu, 1)), AtomicInverseEta(marginal(mu, 2)))

    def sigma_from(self, e1, e2, y1, y2):
        """Sigma at ``(e1, e2)`` when the inverse eta values ``yj`` are already known."""
        e1, e2, y1, y2 = (np.array(a, dtype=complex) for a in np.broadcast_arrays(e1, e2, y1, y2))
        shape = e1.shape
        e1, e2, y1, y2 = (a.ravel() for a in (e1, e2, y1, y2))
        flip = np.abs(e1) > 1.0
        # UD and UU are obtained from DU and DD through the reflection symmetry
        for arr in (e1, e2, y1, y2):
            arr[flip] = 1.0 / np.conj(arr[flip])
        r1 = self.inv[0].ratio_at_zero()
        r2 = self.inv[1].ratio_at_zero()
        out = np.empty(e1.shape, dtype=complex)
        bounded = np.abs(e2) < 1.0
        if np.any(bounded):
            f, g = sigma_bidisk_quotient(self.mu, e1[bounded], e2[bounded], y1[bounded], y2[bounded], r1, r2)
            out[bounded] = f / g
        if np.any(~bounded):
            F, G = sigma_mixed_quotient(self.mu, e1[~bounded], e2[~bounded], y1[~bounded], y2[~bounded], r1)
            out[~bounded] = F / G
        out[flip] = 1.0 / np.conj(out[flip])
        return out.reshape(shape)

    def denominators(self, e1, e2):
        """Modulus of the quotient denominators (g on DD, G on DU) at bounded/mixed points."""
        e1, e2 = np.broadcast_arrays(_as_c(e1), _as_c(e2))
        y1 = self.inv[0](e1)
        y2 = self.inv[1](e2)
        out = np.empty(e1.shape, dtype=float)
        bounded = np.abs(e2) < 1.0
        if np.any(bounded):
            _, g = sigma_bidisk_quotient(self.mu, e1[bounded], e2[bounded], y1[bounded], y2[bounded], 1, 1)
            out[bounded] = np.abs(g)
        if np.any(~bounded):
            _, G = sigma_mixed_quotient(self.mu, e1[~bounded], e2[~bounded], y1[~bounded], y2[~bounded], 1)
            out[~bounded] = np.abs(G)
        return out

    def sigma(self, z, w):
        z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
        reject_torus(z, w)
        return self.sigma_from(z, w, self.inv[0](z), self.inv[1](w))


def _probe_ring(r, count=32):
    return r * np.exp(2j * np.pi * (np.arange(count) + 0.5) / count)


def admissible_window(mu: AtomicMeasure2D, start: float = WINDOW_START) -> DomainWindow:
    """Adaptive working radius for an atomic measure.

    Starting from ``start`` the radius is halved until the Newton inversion of
    both marginal eta-transforms converges on probe rings inside ``D_r`` and
    every Sigma denominator on the probe grid stays at least
    ``DENOMINATOR_MARGIN`` in modulus.
    """
    factor = AtomicFactor(mu)
    r = start
    while r >= WINDOW_MIN:
        try:
            ring = np.concatenate([_probe_ring(r * 0.999), _probe_ring(r * 0.5)])
            for inv in factor.inv:
                inv(ring)
            zz, ww = np.meshgrid(ring, ring, indexing="ij")
            den_dd = factor.denominators(zz, ww)
            den_du = factor.denominators(zz, 1.0 / np.conj(ww))
            den_ud = factor.denominators(ww, 1.0 / np.conj(zz))
            if min(den_dd.min(), den_du.min(), den_ud.min()) >= DENOMINATOR_MARGIN:
                return DomainWindow(r)
        except (WindowError, PoleError, FloatingPointError):
            pass
        r /= 2.0
    raise WindowError("no admissible window found down to the minimal radius")


def sigma_pointwise(mu: AtomicMeasure2D, z, w, window: DomainWindow | None = None):
    """Sigma-transform of an atomic measure at points of ``Omega_r``."""
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    if window is not None and not (np.all(window.contains(z)) and np.all(window.contains(w))):
        raise TransformError("point outside the working window")
    return AtomicFactor(mu).sigma(z, w)


def s_transform(mu: AtomicMeasure2D, z, w):
    """Bi-free partial S-transform via ``psi^{-1}(z) = eta^{-1}(z / (1 + z))``."""
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    if np.any(z == 0) or np.any(w == 0):
        raise TransformError("S-transform is evaluated away from the coordinate axes")
    y1 = psi_inv_pointwise(marginal(mu, 1), z)
    y2 = psi_inv_pointwise(marginal(mu, 2), w)
    h = H2(mu, y1, y2)
    return (1 + z) / z * (1 + w) / w * (1.0 - (1.0 + z + w) / h)


def _check_bidisk(z, w):
    if np.any(np.abs(z) >= 1.0) or np.any(np.abs(w) >= 1.0):
        raise TransformError("opposite transforms are only defined near the origin of the bidisk")


def sigma_op_pointwise(mu: AtomicMeasure2D, z, w):
    """Opposite Sigma-transform on a bidisk around the origin."""
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    _check_bidisk(z, w)
    factor = AtomicFactor(mu)
    y1 = factor.inv[0](z)
    y2 = factor.inv[1](w)
    mu_ = factor.mu
    a = y1[..., None] * mu_.s
    b = y2[..., None] * mu_.t
    core = (mu_.s / (1.0 - a) * b / (1.0 - b)) @ mu_.weights
    core_w = (a / (1.0 - a) * mu_.t / (1.0 - b)) @ mu_.weights
    psi_over_z = _ratio(y1, z, factor.inv[0].ratio_at_zero()) * core
    psi_over_w = _ratio(y2, w, factor.inv[1].ratio_at_zero()) * core_w
    num = psi_over_z + 1.0 / (1.0 - z)
    den = psi_over_w + 1.0 / (1.0 - w)
    if np.any(np.abs(den) < 1e-300):
        raise PoleError("opposite Sigma denominator vanishes")
    return num / den


def s_op_transform(mu: AtomicMeasure2D, z, w):
    """Opposite S-transform near the origin."""
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    if np.any(z == 0) or np.any(w == 0):
        raise TransformError("opposite S-transform is evaluated away from the coordinate axes")
    y1 = psi_inv_pointwise(marginal(mu, 1), z)
    y2 = psi_inv_pointwise(marginal(mu, 2), w)
    h = H2(mu, y1, y2)
    return w * (z + 1) / (z * (w + 1)) * (1.0 + (z - w) / (h - z - 1.0))


# ----------------------------------------------------------------------------
# series engine for Sigma


def moment_series_1d(nu: AtomicMeasure1D, order: int) -> Series1:
    """psi-transform as a power series: coefficients ``m_p`` for ``p >= 1``."""
    c = np.array([0j] + [nu.moment(p) for p in range(1, order + 1)])
    return Series1.from_coeffs(c, order)


def eta_series(nu: AtomicMeasure1D, order: int) -> Series1:
    psi = moment_series_1d(nu, order)
    one = Series1.constant(1.0, order)
    return div(psi, one + psi)


def psi_series_2d(mu: AtomicMeasure2D, order: int) -> Series2:
    k = np.arange(order + 1)
    c = np.array([[moment(mu, p, q) if p and q else 0j for q in k] for p in k])
    return Series2.from_coeffs(c, order)


def h_series_2d(mu: AtomicMeasure2D, order: int) -> Series2:
    k = np.arange(order + 1)
    c = np.array([[moment(mu, p, q) for q in k] for p in k])
    return Series2.from_coeffs(c, order)


def sigma_series(mu: AtomicMeasure2D, order: int = 12) -> Series2:
    """Taylor coefficients of Sigma at the origin, from moments and series reversion."""
    if not in_class_Px(mu):
        raise ClassError("measure is outside the class with nonzero means and m_{1,1}")
    n = order + 1
    inv1 = revert(eta_series(marginal(mu, 1), n))
    inv2 = revert(eta_series(marginal(mu, 2), n))
    num = substitute2(psi_series_2d(mu, n), inv1, inv2)
    den = substitute2(h_series_2d(mu, n), inv1, inv2)
    shifted = np.zeros((n + 1, n + 1), dtype=complex)
    shifted[:n, :n] = num.coeffs[1:, 1:]
    quotient = div(Series2(shifted), den)
    return Series2.from_coeffs(quotient.coeffs, order)


# ----------------------------------------------------------------------------
# transform-presented laws


@dataclass
class TransformLaw:
    """A torus law presented through transform factors.

    ``factors`` is a tuple of ``(factor, multiplicity)`` pairs.  Each factor
    exposes ``inv`` (the two marginal inverse eta evaluators) and
    ``sigma_from(e1, e2, y1, y2)``.  The law's marginal inverse eta-transforms
    are ``e * prod (eta_k^{-1}(e) / e)^{n_k}`` and its Sigma-transform is the
    product of the factors' Sigma-transforms.
    """

    factors: tuple
    window: DomainWindow
    provenance: str = "atomic"
    meta: dict = field(default_factory=dict)

    def eta_inv(self, j: int, z):
        z = _as_c(z)
        reject_torus(z)
        out = z.copy()
        for fac, n in self.factors:
            y = fac.inv[j - 1](z)
            out = out * _ratio(y, z, fac.inv[j - 1].ratio_at_zero()) ** n
        return out

    def eta_inv_1(self, z):
        return self.eta_inv(1, z)

    def eta_inv_2(self, z):
        return self.eta_inv(2, z)

    def sigma(self, z, w):
        z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
        reject_torus(z, w)
        out = np.ones(z.shape, dtype=complex)
        for fac, n in self.factors:
            y1 = fac.inv[0](z)
            y2 = fac.inv[1](w)
            out = out * fac.sigma_from(z, w, y1, y2) ** n
        return out

    def mean(self, j: int) -> complex:
        m = 1.0 + 0j
        for fac, n in self.factors:
            m *= fac.inv[j - 1].mean ** n
        return m

    @property
    def total_multiplicity(self) -> int:
        return sum(n for _, n in self.factors)


def atomic_law(mu: AtomicMeasure2D, window: DomainWindow | None = None) -> TransformLaw:
    """Wrap an atomic measure as a transform-presented law."""
    if window is None:
        window = admissible_window(mu)
    return TransformLaw(((AtomicFactor(mu), 1),), window, "atomic", {"measure": mu})
