"""Free and bi-free multiplicative convolution through transform products.

A convolution is never formed atom by atom.  The free convolution of circle
laws multiplies inverse eta-transforms (``z eta^{-1}_{a*b} = eta^{-1}_a eta^{-1}_b``),
the bi-free convolution multiplies Sigma-transforms, and the psi-transform of
the result is rebuilt from the marginals and Sigma.  Moments are then read
off by a two-dimensional discrete Fourier transform of psi on circles.

Forward eta-transforms of product laws are computed by path continuation in
``z``: along the ray from 0 to ``z`` the value ``e = eta(z)`` and every factor
value ``omega_k = eta_k^{-1}(e)`` are advanced together, each Newton solve
warm-started from the previous step.  This follows the analytic branch even
where ``e`` leaves the disk on which the factor inverses were first certified.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .measure import (
    PX_THRESHOLD,
    AtomicMeasure1D,
    AtomicMeasure2D,
    MomentTable2D,
    marginal,
    moment,
)
from .series import Series1, Series2, div, mul, revert, substitute2
from .transforms import (
    AtomicInverseEta,
    ClassError,
    DomainWindow,
    PoleError,
    TransformError,
    TransformLaw,
    WindowError,
    atomic_law,
    eta_series,
    reject_torus,
    sigma_op_pointwise,
)

LOGGER = logging.getLogger(__name__)

DEFAULT_GRID = 256
DEFAULT_RADIUS = 0.4
AMPLIFICATION_LIMIT = 1e6
QUADRANT_MISMATCH_LIMIT = 1e-6
TRACK_STEP = 0.02
NEAR_POLE = 1e-8


class DiagnosticsError(TransformError):
    """Two independent estimates of the same moment disagree."""


# ----------------------------------------------------------------------------
# one-dimensional laws


@dataclass
class FreeLaw1D:
    """Circle law presented by ``(inverse eta evaluator, multiplicity)`` factors."""

    factors: tuple
    window: DomainWindow = field(default_factory=lambda: DomainWindow(0.5))
    provenance: str = "atomic"

    @property
    def mean(self) -> complex:
        m = 1.0 + 0j
        for inv, n in self.factors:
            m *= inv.mean ** n
        return m

    @property
    def total_multiplicity(self) -> int:
        return sum(n for _, n in self.factors)

    def eta_inv(self, z):
        z = np.asarray(z, dtype=complex)
        reject_torus(z)
        out = z.copy()
        for inv, n in self.factors:
            y = inv(z)
            with np.errstate(all="ignore"):
                ratio = np.where(z == 0, inv.ratio_at_zero(), y / z)
            out = out * ratio ** n
        return out

    def _eval_factors(self, e, omegas):
        total = self.total_multiplicity
        val = e.copy()
        dlog = (1.0 - total) / e
        new = []
        for (inv, n), om in zip(self.factors, omegas):
            om = inv.track(e, om)
            new.append(om)
            val = val * (om / e) ** n
            dlog = dlog + n * inv.derivative(e, om) / om
        return val, val * dlog, new

    def _track_inside(self, z, step=TRACK_STEP):
        """Forward eta and factor values at points of the open unit disk."""
        e_out = np.zeros(z.shape, dtype=complex)
        om_out = [np.zeros(z.shape, dtype=complex) for _ in self.factors]
        nz = np.abs(z) > 0
        if not np.any(nz):
            return e_out, om_out
        zt = z[nz]
        nsteps = max(10, int(np.ceil(np.max(np.abs(zt)) / step)))
        m = self.mean
        target = zt / nsteps
        e = m * target
        om = [e * inv.ratio_at_zero() for inv, _ in self.factors]
        deriv = None
        for k in range(1, nsteps + 1):
            target = zt * (k / nsteps)
            if deriv is not None:
                e = e + (zt / nsteps) / deriv
            for _ in range(60):
                val, deriv, om = self._eval_factors(e, om)
                stepv = (val - target) / deriv
                e = e - stepv
                if np.all(np.abs(stepv) <= 1e-13 * np.abs(e)):
                    break
            else:
                val, deriv, om = self._eval_factors(e, om)
                if np.max(np.abs(val - target) / np.abs(target)) > 1e-11:
                    raise WindowError("continuation of the forward eta-transform did not converge")
        val, deriv, om = self._eval_factors(e, om)
        if np.max(np.abs(val - zt) / np.abs(zt)) > 1e-11:
            raise WindowError("forward eta-transform residual too large")
        if np.any(np.abs(e) >= 1.0) or any(np.any(np.abs(o) >= 1.0) for o in om):
            raise WindowError("continuation left the unit disk")
        e_out[nz] = e
        for slot, o in zip(om_out, om):
            slot[nz] = o
        return e_out, om_out

    def track(self, z):
        """Return ``eta(z)`` and the list of factor values ``eta_k^{-1}(eta(z))``."""
        z = np.asarray(z, dtype=complex)
        reject_torus(z)
        e = np.empty(z.shape, dtype=complex)
        om = [np.empty(z.shape, dtype=complex) for _ in self.factors]
        inner = np.abs(z) < 1.0
        if np.any(inner):
            ei, oi = self._track_inside(z[inner])
            e[inner] = ei
            for slot, o in zip(om, oi):
                slot[inner] = o
        if np.any(~inner):
            ei, oi = self._track_inside(1.0 / np.conj(z[~inner]))
            e[~inner] = 1.0 / np.conj(ei)
            for slot, o in zip(om, oi):
                slot[~inner] = 1.0 / np.conj(o)
        return e, om

    def eta(self, z):
        return self.track(z)[0]

    def psi(self, z):
        e = self.eta(z)
        return e / (1.0 - e)

    def moments(self, order: int, radius: float | None = None, grid: int = DEFAULT_GRID) -> np.ndarray:
        """Moments ``m_0..m_order`` from the DFT of psi on two circles."""
        rho = self.window.grid_radius if radius is None else min(radius, self.window.grid_radius)
        _guard(rho, order)
        theta = 2.0 * np.pi * np.arange(grid) / grid
        inner = np.fft.fft(self.psi(rho * np.exp(1j * theta))) / grid
        outer = np.fft.fft(self.psi(np.exp(1j * theta) / rho)) / grid
        p = np.arange(1, order + 1)
        est_in = inner[p] / rho ** p
        # outside the disk: psi(z) = -1 - sum_p conj(m_p) z^{-p}
        est_out = -np.conj(outer[grid - p] * rho ** (-p))
        out = np.empty(order + 1, dtype=complex)
        out[0] = 1.0
        out[1:] = 0.5 * (est_in + est_out)
        return out


def free_law(nu) -> FreeLaw1D:
    """Wrap an atomic circle law (or pass a FreeLaw1D through)."""
    if isinstance(nu, FreeLaw1D):
        return nu
    if isinstance(nu, AtomicMeasure1D):
        return FreeLaw1D(((AtomicInverseEta(nu), 1),), DomainWindow(0.5), "atomic")
    raise TypeError("expected an atomic circle measure or a FreeLaw1D")


def free_convolve(nu1, nu2) -> FreeLaw1D:
    """Free multiplicative convolution via the product of inverse eta-transforms."""
    a, b = free_law(nu1), free_law(nu2)
    r = min(a.window.r, b.window.r)
    return FreeLaw1D(a.factors + b.factors, DomainWindow(r), "product-of-inverses")


def free_power(nu, n: int) -> FreeLaw1D:
    a = free_law(nu)
    return FreeLaw1D(tuple((inv, k * n) for inv, k in a.factors), a.window, "product-of-inverses")


def marginal_law(law: TransformLaw, j: int) -> FreeLaw1D:
    """The j-th marginal of a transform-presented law as a free product law."""
    return FreeLaw1D(tuple((fac.inv[j - 1], n) for fac, n in law.factors), law.window, law.provenance)


# ----------------------------------------------------------------------------
# bi-free convolution


def as_law(mu) -> TransformLaw:
    if isinstance(mu, TransformLaw):
        return mu
    if isinstance(mu, AtomicMeasure2D):
        return atomic_law(mu)
    raise TypeError("expected an atomic torus measure or a TransformLaw")


def bifree_convolve(mu1, mu2) -> TransformLaw:
    """Bi-free multiplicative convolution: Sigma-transforms and marginal inverses multiply."""
    a, b = as_law(mu1), as_law(mu2)
    window = DomainWindow(min(a.window.r, b.window.r))
    return TransformLaw(a.factors + b.factors, window, "convolution")


def bifree_power(mu, n: int) -> TransformLaw:
    """n-fold bi-free convolution power (Sigma^n, and eta^{-1}(z)^n / z^(n-1) for marginals)."""
    if n < 1:
        raise ValueError("power must be a positive integer")
    a = as_law(mu)
    return TransformLaw(tuple((fac, k * n) for fac, k in a.factors), a.window, "convolution")


def rotation_law(lam: tuple[complex, complex]) -> TransformLaw:
    from .measure import point_mass

    return atomic_law(point_mass(*lam), DomainWindow(0.5))


# ----------------------------------------------------------------------------
# reconstruction of psi


@dataclass
class TrackedAxis:
    """Forward eta values and factor values along one coordinate."""

    points: np.ndarray
    e: np.ndarray
    omegas: list

    @property
    def psi(self):
        return self.e / (1.0 - self.e)


def track_axis(law: TransformLaw, j: int, points) -> TrackedAxis:
    fl = marginal_law(law, j)
    e, om = fl.track(points)
    return TrackedAxis(np.asarray(points, dtype=complex), e, om)


def _sigma_tracked(law: TransformLaw, ax1: TrackedAxis, ax2: TrackedAxis, outer: bool):
    if outer:
        def expand(a, b):
            return a[:, None], b[None, :]
    else:
        def expand(a, b):
            return a, b
    e1, e2 = expand(ax1.e, ax2.e)
    total = np.ones(np.broadcast(e1, e2).shape, dtype=complex)
    for k, (fac, n) in enumerate(law.factors):
        y1, y2 = expand(ax1.omegas[k], ax2.omegas[k])
        total = total * fac.sigma_from(e1, e2, y1, y2) ** n
    return total


def psi_from_tracks(law: TransformLaw, ax1: TrackedAxis, ax2: TrackedAxis, outer: bool = True):
    """psi of the law from tracked marginal data, using

    psi = [psi_1 + psi_2 + 1] E / (1 - E),   E = eta_1 eta_2 Sigma(eta_1, eta_2).
    """
    sig = _sigma_tracked(law, ax1, ax2, outer)
    if outer:
        e1, e2 = ax1.e[:, None], ax2.e[None, :]
        p1, p2 = ax1.psi[:, None], ax2.psi[None, :]
    else:
        e1, e2, p1, p2 = ax1.e, ax2.e, ax1.psi, ax2.psi
    big_e = e1 * e2 * sig
    den = 1.0 - big_e
    if np.any(np.abs(den) < NEAR_POLE):
        raise PoleError("1 - eta eta Sigma vanishes at a reconstruction point")
    return (p1 + p2 + 1.0) * big_e / den


def psi_reconstruct(law, z, w):
    """psi-transform of a transform-presented law at the points ``(z, w)`` (elementwise)."""
    law = as_law(law)
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    shape = z.shape
    ax1 = track_axis(law, 1, z.ravel())
    ax2 = track_axis(law, 2, w.ravel())
    return psi_from_tracks(law, ax1, ax2, outer=False).reshape(shape)


# ----------------------------------------------------------------------------
# moment extraction


@dataclass(frozen=True)
class EvaluationGrid:
    """``M x M`` product grid on circles of radii ``r_z`` and ``r_w`` (a radius above 1 selects
    the expansion at infinity in that coordinate).

    Sample angles are ``offset + 2 pi k / M``.  Nonzero offsets keep the grid
    away from real points, where the reconstruction formula can degenerate
    to 0/0 for laws with symmetric marginals.
    """

    M: int = DEFAULT_GRID
    r_z: float = DEFAULT_RADIUS
    r_w: float = DEFAULT_RADIUS
    offset_z: float = 0.0
    offset_w: float = 0.0

    def __post_init__(self):
        if self.M < 4 or self.M & (self.M - 1):
            raise ValueError("grid size must be a power of two, at least 4")
        for r in (self.r_z, self.r_w):
            if r <= 0 or abs(r - 1.0) < 1e-9:
                raise ValueError("grid radii must be positive and different from 1")

    def circle(self, r, offset=0.0):
        return r * np.exp(1j * (offset + 2.0 * np.pi * np.arange(self.M) / self.M))

    def z_points(self):
        return self.circle(self.r_z, self.offset_z)

    def w_points(self):
        return self.circle(self.r_w, self.offset_w)


def default_offsets(M: int, attempt: int = 0) -> tuple[float, float]:
    """Angular offsets for the ``attempt``-th sampling of an ``M``-point grid."""
    step = 2.0 * np.pi / M
    golden = 0.5 * (np.sqrt(5.0) - 1.0)
    return step * ((0.5 + attempt * golden) % 1.0), step * ((golden + attempt * 0.5 * golden) % 1.0)


def _guard(rho: float, order: int):
    amp = (1.0 / rho) ** order
    if amp > AMPLIFICATION_LIMIT:
        raise TransformError(
            f"coefficient amplification {amp:.3g} at order {order} exceeds {AMPLIFICATION_LIMIT:.0e}; "
            "lower the order or enlarge the radius"
        )


def _quadrant_coefficients(vals: np.ndarray, grid: EvaluationGrid, order: int):
    """Return the ``order x order`` block of coefficients of ``z^{+-p} w^{+-q}``, p, q >= 1.

    Signs follow the radii: a radius above 1 reads negative powers.
    """
    M = grid.M
    c = np.fft.fft2(vals) / (M * M)
    k = np.arange(1, order + 1)
    fz = k if grid.r_z < 1 else -k
    fw = k if grid.r_w < 1 else -k
    scale_z = grid.r_z ** fz * np.exp(1j * fz * grid.offset_z)
    scale_w = grid.r_w ** fw * np.exp(1j * fw * grid.offset_w)
    return c[np.ix_(fz % M, fw % M)] / np.outer(scale_z, scale_w), c


def extract_quadrant(law, grid: EvaluationGrid, order: int, tracks=None):
    """Moments of one sign quadrant.

    Returns the ``order x order`` block ``B[p-1, q-1] = m_{sp, sq}`` with signs
    ``s = +1`` for radius below 1 and ``-1`` above, together with the largest
    leftover coefficient on the coordinate axes (a consistency diagnostic).

    Expansion used in each component (p, q >= 1)::

        DD: psi                   =  sum m_{p,q}   z^p    w^q
        DU: psi + psi_1(z)        = -sum m_{p,-q}  z^p    w^-q
        UD: psi + psi_2(w)        = -sum m_{-p,q}  z^-p   w^q
        UU: psi + psi_1 + psi_2 + 1 = sum m_{-p,-q} z^-p  w^-q
    """
    law = as_law(law)
    for r in (grid.r_z, grid.r_w):
        _guard(min(r, 1.0 / r), order)
    if order > grid.M // 4:
        raise TransformError("grid too coarse for the requested order")
    if tracks is None:
        ax1 = track_axis(law, 1, grid.z_points())
        ax2 = track_axis(law, 2, grid.w_points())
    else:
        ax1, ax2 = tracks
    vals = psi_from_tracks(law, ax1, ax2, outer=True)
    uz, uw = grid.r_z > 1, grid.r_w > 1
    sign = 1.0
    if uw:
        vals = vals + ax1.psi[:, None]
    if uz:
        vals = vals + ax2.psi[None, :]
    if uz and uw:
        vals = vals + 1.0
    if uz != uw:
        sign = -1.0
    block, raw = _quadrant_coefficients(vals, grid, order)
    leftover = max(float(np.max(np.abs(raw[0, :]))), float(np.max(np.abs(raw[:, 0]))))
    return sign * block, leftover


@dataclass
class ExtractionReport:
    table: MomentTable2D
    radius: float
    window: float
    quadrant_mismatch: float
    axis_leftover: float
    marginal_mismatch: float
    resamples: int = 0

    def as_dict(self) -> dict:
        return {
            "final_window_radius": self.window,
            "grid_radius": self.radius,
            "max_hermitian_residual": self.table.hermitian_residual(),
            "min_moment_matrix_eigenvalue": self.table.min_eigenvalue(),
            "max_modulus": self.table.max_modulus(),
            "quadrant_mismatch": self.quadrant_mismatch,
            "axis_leftover": self.axis_leftover,
            "marginal_mismatch": self.marginal_mismatch,
            "resamples": self.resamples,
        }


def moment_table(law, order: int, grid: int = DEFAULT_GRID, radius: float = DEFAULT_RADIUS,
                 strict: bool = True, attempts: int = 4) -> ExtractionReport:
    """Full moment table ``|p|, |q| <= order`` of a law via the four quadrant extractions.

    The grid radius is ``min(radius, r/2)`` where ``r`` is the law's working
    window.  The DD estimate of ``m_{p,q}`` is averaged with the conjugated UU
    estimate of ``m_{-p,-q}``, and DU with the conjugated UD estimate.  If a
    grid point comes too close to a zero of ``1 - E`` the grid is rotated and
    sampled again.
    """
    law = as_law(law)
    for attempt in range(attempts):
        try:
            return _moment_table(law, order, grid, radius, strict, default_offsets(grid, attempt), attempt)
        except PoleError:
            LOGGER.info("reconstruction grid hit a degenerate point; resampling (attempt %d)", attempt + 1)
    raise PoleError("no usable reconstruction grid found")


def _moment_table(law, order, grid, radius, strict, offsets, attempt) -> ExtractionReport:
    rho = min(radius, law.window.grid_radius)
    R = 1.0 / rho
    off_z, off_w = offsets
    base = EvaluationGrid(grid, rho, rho, off_z, off_w)
    axes = {}
    for j, off in ((1, off_z), (2, off_w)):
        inner = track_axis(law, j, base.circle(rho, off))
        outer = track_axis(law, j, base.circle(R, off))
        axes[j] = (inner, outer)

    def quad(rz, rw):
        ax1 = axes[1][0] if rz < 1 else axes[1][1]
        ax2 = axes[2][0] if rw < 1 else axes[2][1]
        return extract_quadrant(law, EvaluationGrid(grid, rz, rw, off_z, off_w), order, (ax1, ax2))

    dd, l1 = quad(rho, rho)
    du, l2 = quad(rho, R)
    ud, l3 = quad(R, rho)
    uu, l4 = quad(R, R)
    mismatch = max(float(np.max(np.abs(dd - np.conj(uu)))), float(np.max(np.abs(du - np.conj(ud)))))
    if strict and mismatch > QUADRANT_MISMATCH_LIMIT:
        raise DiagnosticsError(f"quadrant estimates disagree by {mismatch:.3e}")
    pos = 0.5 * (dd + np.conj(uu))  # m_{p,q}, p,q >= 1
    mix = 0.5 * (du + np.conj(ud))  # m_{p,-q}

    marg = []
    p = np.arange(1, order + 1)
    for j, off in ((1, off_z), (2, off_w)):
        inner, outer = axes[j]
        ci = np.fft.fft(inner.psi) / grid
        co = np.fft.fft(outer.psi) / grid
        est_in = ci[p] / (rho ** p * np.exp(1j * p * off))
        est_out = -np.conj(co[grid - p] / (R ** (-p) * np.exp(-1j * p * off)))
        marg.append((0.5 * (est_in + est_out), float(np.max(np.abs(est_in - est_out)))))

    n = order
    vals = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    vals[n, n] = 1.0
    for p in range(1, n + 1):
        vals[n + p, n] = marg[0][0][p - 1]
        vals[n - p, n] = np.conj(marg[0][0][p - 1])
        vals[n, n + p] = marg[1][0][p - 1]
        vals[n, n - p] = np.conj(marg[1][0][p - 1])
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            vals[n + p, n + q] = pos[p - 1, q - 1]
            vals[n - p, n - q] = np.conj(pos[p - 1, q - 1])
            vals[n + p, n - q] = mix[p - 1, q - 1]
            vals[n - p, n + q] = np.conj(mix[p - 1, q - 1])
    table = MomentTable2D(order, vals)
    return ExtractionReport(
        table=table,
        radius=rho,
        window=law.window.r,
        quadrant_mismatch=mismatch,
        axis_leftover=max(l1, l2, l3, l4),
        marginal_mismatch=max(marg[0][1], marg[1][1]),
        resamples=attempt,
    )


def extract_moments(law, grid: EvaluationGrid, order: int):
    """Single-quadrant extraction on an explicit grid (see :func:`extract_quadrant`)."""
    law = as_law(law)
    for r in (grid.r_z, grid.r_w):
        rr = r if r < 1 else 1.0 / r
        if rr > law.window.grid_radius + 1e-15:
            raise TransformError("grid radius outside the halved working window")
    return extract_quadrant(law, grid, order)[0]


# ----------------------------------------------------------------------------
# positivity of the Poisson integral


def poisson_positivity(law, radius: float = 0.8, size: int = 64) -> float:
    """Minimum over a torus grid of radius ``radius`` of the Poisson integral

    Re[(g(z, w) - g(z, 1/conj w)) / 2],   g = 4 psi + 2 (psi_1 + psi_2) + 1,

    which is nonnegative for a genuine probability law.  The Poisson integral
    is separately harmonic, so its minimum over the closed polydisk is
    attained on this torus.
    """
    law = as_law(law)
    for attempt in range(4):
        off_z, off_w = default_offsets(size, attempt)
        zc = radius * np.exp(1j * (off_z + 2 * np.pi * np.arange(size) / size))
        wc = radius * np.exp(1j * (off_w + 2 * np.pi * np.arange(size) / size))
        try:
            ax1 = track_axis(law, 1, zc)
            ax2 = track_axis(law, 2, wc)
            ax2r = track_axis(law, 2, 1.0 / np.conj(wc))
            psi_in = psi_from_tracks(law, ax1, ax2, outer=True)
            psi_out = psi_from_tracks(law, ax1, ax2r, outer=True)
        except PoleError:
            continue
        g_in = 4 * psi_in + 2 * (ax1.psi[:, None] + ax2.psi[None, :]) + 1
        g_out = 4 * psi_out + 2 * (ax1.psi[:, None] + ax2r.psi[None, :]) + 1
        return float(np.min(np.real(0.5 * (g_in - g_out))))
    raise PoleError("no usable grid for the Poisson integral")


def poisson_positivity_atomic(mu: AtomicMeasure2D, radius: float = 0.8, size: int = 64) -> float:
    """Direct version for atomic measures (exact psi sums)."""
    from .transforms import psi1, psi2

    circle = radius * np.exp(2j * np.pi * (np.arange(size) + 0.5) / size)
    z = circle[:, None]
    w = circle[None, :]
    wr = 1.0 / np.conj(w)
    m1, m2 = marginal(mu, 1), marginal(mu, 2)

    def g(a, b):
        return 4 * psi2(mu, a, b) + 2 * (psi1(m1, a) + psi1(m2, b)) + 1

    return float(np.min(np.real(0.5 * (g(z, w) - g(z, wr)))))


# ----------------------------------------------------------------------------
# opposite convolution


class OppositeSigma:
    """Pointwise product of opposite Sigma-transforms on a bidisk around 0."""

    def __init__(self, measures):
        self.measures = tuple(measures)

    def __call__(self, z, w):
        out = np.ones(np.broadcast(np.asarray(z), np.asarray(w)).shape, dtype=complex)
        for mu in self.measures:
            out = out * sigma_op_pointwise(mu, z, w)
        return out


def opposite_convolve(mu1: AtomicMeasure2D, mu2: AtomicMeasure2D) -> OppositeSigma:
    """Opposite bi-free convolution, presented by its opposite Sigma-transform."""
    return OppositeSigma((mu1, mu2))


def opposite_marginal(mu1: AtomicMeasure2D, mu2: AtomicMeasure2D, j: int) -> FreeLaw1D:
    """Marginals of the opposite convolution are free convolutions of the marginals
    (free multiplicative convolution on the circle is commutative)."""
    return free_convolve(marginal(mu1, j), marginal(mu2, j))


# ----------------------------------------------------------------------------
# centered inputs: closed forms


def centered_alternating_moment(left_labels, right_labels, covariances) -> complex:
    """Expectation of an alternating product of centered left and right variables.

    ``left_labels`` lists the factor labels ``alpha(1..m)`` of the left word
    and ``right_labels`` the labels ``beta(1..n)``; neighbouring labels must
    differ.  ``covariances[k]`` is the expectation of ``a_k b_k``.  The value
    is zero unless ``m = n`` and the labels pair up, in which case it is the
    product of the covariances.
    """
    for word in (left_labels, right_labels):
        for a, b in zip(word, word[1:]):
            if a == b:
                raise ValueError("labels must alternate")
    if len(left_labels) != len(right_labels):
        return 0j
    if len(covariances) != len(left_labels):
        raise ValueError("one covariance per pair is required")
    out = 1.0 + 0j
    for a, b, c in zip(left_labels, right_labels, covariances):
        if a != b:
            return 0j
        out *= c
    return out


@dataclass
class HaarTestResult:
    is_haar: bool
    m11: tuple
    table: MomentTable2D


def haar_test(mu1: AtomicMeasure2D, mu2: AtomicMeasure2D, order: int = 6,
              tau: float = PX_THRESHOLD) -> HaarTestResult:
    """Convolution of two measures with centered marginals.

    Returns whether the result is the uniform law on the torus, and its moment
    table in closed form: ``m_{p,p} = a^p b^p`` for ``p >= 1`` (with ``a, b``
    the mixed moments ``m_{1,1}`` of the inputs), conjugates for ``p <= -1``,
    and zero elsewhere off the origin.
    """
    for mu in (mu1, mu2):
        if abs(moment(mu, 1, 0)) > tau or abs(moment(mu, 0, 1)) > tau:
            raise ClassError("haar_test needs inputs whose marginal means vanish")
    a, b = moment(mu1, 1, 1), moment(mu2, 1, 1)
    n = order
    vals = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    vals[n, n] = 1.0
    for p in range(1, n + 1):
        vals[n + p, n + p] = (a * b) ** p
        vals[n - p, n - p] = np.conj((a * b) ** p)
    is_haar = abs(a) <= tau or abs(b) <= tau
    return HaarTestResult(is_haar, (a, b), MomentTable2D(n, vals))


# ----------------------------------------------------------------------------
# independent series engine


def series_free_moments(measures, order: int, multiplicities=None) -> np.ndarray:
    """Moments ``m_1..m_order`` of a free product by series reversion only."""
    if multiplicities is None:
        multiplicities = [1] * len(measures)
    n = order + 1
    prod = Series1.constant(1.0, n)
    for nu, k in zip(measures, multiplicities):
        inv = revert(eta_series(nu, n))
        ratio = Series1.from_coeffs(np.append(inv.coeffs[1:], 0.0), n)  # eta^{-1}(z)/z
        for _ in range(k):
            prod = mul(prod, ratio)
    inv_total = Series1.from_coeffs(np.concatenate([[0.0], prod.coeffs[:-1]]), n)
    e = revert(inv_total)
    one = Series1.constant(1.0, n)
    psi = div(e, one - e)
    return np.concatenate([[1.0], psi.coeffs[1:order + 1]])


def sigma_series_from_moments(mfunc, mean1, mean2, order: int, marg1, marg2) -> Series2:
    """Sigma series from moment data: ``mfunc(p, q)`` and marginal moment arrays."""
    n = order + 1
    k = np.arange(n + 1)
    psi = Series2.from_coeffs([[mfunc(p, q) if p and q else 0j for q in k] for p in k], n)
    hh = Series2.from_coeffs([[mfunc(p, q) for q in k] for p in k], n)
    one = Series1.constant(1.0, n)
    inv = []
    for marg in (marg1, marg2):
        ps = Series1.from_coeffs(np.concatenate([[0.0], marg[1:n + 1]]), n)
        inv.append(revert(div(ps, one + ps)))
    num = substitute2(psi, inv[0], inv[1])
    den = substitute2(hh, inv[0], inv[1])
    shifted = np.zeros((n + 1, n + 1), dtype=complex)
    shifted[:n, :n] = num.coeffs[1:, 1:]
    return Series2.from_coeffs(div(Series2(shifted), den).coeffs, order)


def series_bifree_moments(measures, order: int, multiplicities=None) -> np.ndarray:
    """Positive-quadrant moments ``m_{p,q}``, ``0 <= p, q <= order``, of a bi-free product,
    computed only with formal series (reversion, composition, products)."""
    from .transforms import sigma_series

    if multiplicities is None:
        multiplicities = [1] * len(measures)
    n = order
    sig = Series2.constant(1.0, n)
    for mu, k in zip(measures, multiplicities):
        s = sigma_series(mu, n)
        for _ in range(k):
            sig = mul(sig, s)
    etas = []
    psis = []
    one = Series1.constant(1.0, n)
    for j in (1, 2):
        m = series_free_moments([marginal(mu, j) for mu in measures], n, multiplicities)
        ps = Series1.from_coeffs(np.concatenate([[0.0], m[1:]]), n)
        psis.append(ps)
        etas.append(div(ps, one + ps))
    comp = substitute2(sig, etas[0], etas[1])
    ee = Series2(np.outer(etas[0].coeffs, etas[1].coeffs))
    big_e = mul(ee, comp)
    base = np.zeros((n + 1, n + 1), dtype=complex)
    base[:, 0] += psis[0].coeffs
    base[0, :] += psis[1].coeffs
    base[0, 0] += 1.0
    psi = div(mul(Series2(base), big_e), Series2.constant(1.0, n) - big_e)
    out = psi.coeffs.copy()
    out[1:, 0] = psis[0].coeffs[1:]
    out[0, 1:] = psis[1].coeffs[1:]
    out[0, 0] = 1.0
    return out
