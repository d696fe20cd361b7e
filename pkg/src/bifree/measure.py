"""Atomic measures on the circle and on the torus.

Atoms are stored as angles (radians, principal branch ``(-pi, pi]``) together
with nonnegative weights, so every support point has unit modulus by
construction.  Atoms whose angles agree within ``MERGE_TOL`` are merged and
zero-weight atoms are dropped.  All objects are immutable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

LOGGER = logging.getLogger(__name__)

MERGE_TOL = 1e-12
"""Angular distance below which two atoms are considered identical."""

MASS_TOL = 1e-12
"""Tolerance on total mass for probability measures."""

PX_THRESHOLD = 1e-9
"""Default threshold for membership in the class of measures with nonzero means."""


class MeasureError(ValueError):
    """Raised for invalid measure data."""


def principal_angle(theta):
    """Map angles to the principal branch ``(-pi, pi]``."""
    theta = np.asarray(theta, dtype=float)
    out = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    out = np.where(out <= -np.pi, out + 2.0 * np.pi, out)
    return out


def _angle_distance(a, b):
    d = np.abs(principal_angle(np.asarray(a) - np.asarray(b)))
    return d


def _merge(angle_cols: Sequence[np.ndarray], weights: np.ndarray):
    """Greedy merge of atoms whose angles agree coordinatewise within MERGE_TOL."""
    n = len(weights)
    reps: list[int] = []
    acc: list[float] = []
    for i in range(n):
        if weights[i] == 0.0:
            continue
        hit = -1
        for slot, j in enumerate(reps):
            if all(_angle_distance(col[i], col[j]) < MERGE_TOL for col in angle_cols):
                hit = slot
                break
        if hit < 0:
            reps.append(i)
            acc.append(float(weights[i]))
        else:
            acc[hit] += float(weights[i])
    idx = np.array(reps, dtype=int)
    cols = tuple(np.asarray(col, dtype=float)[idx] if len(idx) else np.zeros(0) for col in angle_cols)
    return cols, np.array(acc, dtype=float)


def _check_weights(weights: np.ndarray, probability: bool):
    if np.any(~np.isfinite(weights)):
        raise MeasureError("weights must be finite")
    if np.any(weights < 0):
        bad = int(np.flatnonzero(weights < 0)[0])
        raise MeasureError(f"negative weight at atom index {bad}")
    if probability and abs(weights.sum() - 1.0) > MASS_TOL:
        raise MeasureError(
            f"total mass {weights.sum():.17g} differs from 1; use a finite-measure constructor"
        )


@dataclass(frozen=True)
class AtomicMeasure1D:
    """Finite positive measure on the unit circle with finitely many atoms."""

    angles: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.angles.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def from_angles(cls, angles: Iterable[float], weights: Iterable[float], probability: bool = True):
        ang = principal_angle(np.atleast_1d(np.asarray(list(angles), dtype=float)))
        w = np.atleast_1d(np.asarray(list(weights), dtype=float))
        if ang.shape != w.shape:
            raise MeasureError("angles and weights must have the same length")
        if np.any(~np.isfinite(ang)):
            bad = int(np.flatnonzero(~np.isfinite(ang))[0])
            raise MeasureError(f"non-finite angle at atom index {bad}")
        _check_weights(w, probability)
        (ang,), w = _merge((ang,), w)
        return cls(ang, w)

    @classmethod
    def from_points(cls, points: Iterable[complex], weights: Iterable[float], probability: bool = True):
        pts = np.atleast_1d(np.asarray(list(points), dtype=complex))
        if np.any(np.abs(np.abs(pts) - 1.0) > 1e-12):
            bad = int(np.flatnonzero(np.abs(np.abs(pts) - 1.0) > 1e-12)[0])
            raise MeasureError(f"atom index {bad} is not on the unit circle")
        return cls.from_angles(np.angle(pts), weights, probability)

    @classmethod
    def finite(cls, angles, weights):
        """Finite (not necessarily probability) measure."""
        return cls.from_angles(angles, weights, probability=False)

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return abs(self.mass - 1.0) <= MASS_TOL

    def moment(self, p: int) -> complex:
        return complex(np.sum(self.weights * np.exp(1j * p * self.angles)))

    @property
    def mean(self) -> complex:
        return self.moment(1)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class AtomicMeasure2D:
    """Finite positive measure on the torus with finitely many atoms."""

    s_angles: np.ndarray
    t_angles: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.s_angles, self.t_angles, self.weights):
            arr.setflags(write=False)

    @classmethod
    def from_angles(cls, s_angles, t_angles, weights, probability: bool = True):
        s = principal_angle(np.atleast_1d(np.asarray(list(s_angles), dtype=float)))
        t = principal_angle(np.atleast_1d(np.asarray(list(t_angles), dtype=float)))
        w = np.atleast_1d(np.asarray(list(weights), dtype=float))
        if not (s.shape == t.shape == w.shape):
            raise MeasureError("angle and weight arrays must have the same length")
        for arr in (s, t):
            if np.any(~np.isfinite(arr)):
                bad = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise MeasureError(f"non-finite angle at atom index {bad}")
        _check_weights(w, probability)
        (s, t), w = _merge((s, t), w)
        return cls(s, t, w)

    @classmethod
    def from_points(cls, s_points, t_points, weights, probability: bool = True):
        s = np.atleast_1d(np.asarray(list(s_points), dtype=complex))
        t = np.atleast_1d(np.asarray(list(t_points), dtype=complex))
        for arr in (s, t):
            off = np.abs(np.abs(arr) - 1.0) > 1e-12
            if np.any(off):
                raise MeasureError(f"atom index {int(np.flatnonzero(off)[0])} is not on the torus")
        return cls.from_angles(np.angle(s), np.angle(t), weights, probability)

    @classmethod
    def finite(cls, s_angles, t_angles, weights):
        """Finite (not necessarily probability) measure, e.g. a Levy measure."""
        return cls.from_angles(s_angles, t_angles, weights, probability=False)

    @classmethod
    def zero(cls):
        return cls(np.zeros(0), np.zeros(0), np.zeros(0))

    @property
    def s(self) -> np.ndarray:
        return np.exp(1j * self.s_angles)

    @property
    def t(self) -> np.ndarray:
        return np.exp(1j * self.t_angles)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return abs(self.mass - 1.0) <= MASS_TOL

    def moment(self, p: int, q: int) -> complex:
        return moment(self, p, q)

    def __len__(self):
        return len(self.weights)


def point_mass(a: complex, b: complex) -> AtomicMeasure2D:
    """The point mass at ``(a, b)`` on the torus."""
    return AtomicMeasure2D.from_points([a], [b], [1.0])


def point_mass_1d(a: complex) -> AtomicMeasure1D:
    return AtomicMeasure1D.from_points([a], [1.0])


def marginal(mu: AtomicMeasure2D, j: int) -> AtomicMeasure1D:
    """Push-forward of ``mu`` under the j-th coordinate projection (j = 1 or 2)."""
    if j not in (1, 2):
        raise MeasureError("marginal index must be 1 or 2")
    ang = mu.s_angles if j == 1 else mu.t_angles
    return AtomicMeasure1D.from_angles(ang, mu.weights, probability=False)


def reflect(mu: AtomicMeasure2D) -> AtomicMeasure2D:
    """Coordinate reflection ``(s, t) -> (s, 1/t)``."""
    return AtomicMeasure2D.from_angles(mu.s_angles, -mu.t_angles, mu.weights, probability=False)


def rotate(mu: AtomicMeasure2D, lam: tuple[complex, complex]) -> AtomicMeasure2D:
    """Marginal rotation by the point ``lam``; equals the convolution with a point mass."""
    l1, l2 = complex(lam[0]), complex(lam[1])
    if abs(abs(l1) - 1) > 1e-12 or abs(abs(l2) - 1) > 1e-12:
        raise MeasureError("rotation must be by unit-modulus numbers")
    return AtomicMeasure2D.from_angles(
        mu.s_angles + np.angle(l1), mu.t_angles + np.angle(l2), mu.weights, probability=False
    )


def rotate_1d(nu: AtomicMeasure1D, a: complex) -> AtomicMeasure1D:
    return AtomicMeasure1D.from_angles(nu.angles + np.angle(a), nu.weights, probability=False)


def product_measure(alpha: AtomicMeasure1D, beta: AtomicMeasure1D) -> AtomicMeasure2D:
    """Product of two circle measures."""
    s = np.repeat(alpha.angles, len(beta))
    t = np.tile(beta.angles, len(alpha))
    w = np.repeat(alpha.weights, len(beta)) * np.tile(beta.weights, len(alpha))
    return AtomicMeasure2D.from_angles(s, t, w, probability=False)


def moment(mu: AtomicMeasure2D, p: int, q: int) -> complex:
    """The moment ``int s^p t^q dmu``; ``moment(mu, 0, 0)`` is the total mass."""
    return complex(np.sum(mu.weights * np.exp(1j * (p * mu.s_angles + q * mu.t_angles))))


def moment_1d(nu: AtomicMeasure1D, p: int) -> complex:
    return nu.moment(p)


def in_class_Px(mu: AtomicMeasure2D, tau: float = PX_THRESHOLD) -> bool:
    """True when both marginal means and the mixed moment m_{1,1} exceed ``tau`` in modulus."""
    return (
        abs(moment(mu, 1, 0)) > tau
        and abs(moment(mu, 0, 1)) > tau
        and abs(moment(mu, 1, 1)) > tau
    )


def infinitesimality_norm(row: Sequence[AtomicMeasure2D], eps: float) -> float:
    """Largest mass, over a row, outside the set ``|s-1| + |t-1| < eps``."""
    if eps <= 0:
        raise MeasureError("eps must be positive")
    worst = 0.0
    for mu in row:
        dist = np.abs(mu.s - 1.0) + np.abs(mu.t - 1.0)
        worst = max(worst, float(mu.weights[dist >= eps].sum()))
    return worst


class MomentTable2D:
    """Truncated table of torus moments ``m[p, q]`` for ``|p|, |q| <= order``."""

    def __init__(self, order: int, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        if values.shape != (2 * order + 1, 2 * order + 1):
            raise MeasureError("moment array shape does not match the order")
        self.order = int(order)
        self._values = values.copy()
        self._values.setflags(write=False)

    @classmethod
    def from_measure(cls, mu: AtomicMeasure2D, order: int) -> "MomentTable2D":
        k = np.arange(-order, order + 1)
        phase = np.exp(1j * (k[:, None, None] * mu.s_angles[None, None, :]
                             + k[None, :, None] * mu.t_angles[None, None, :]))
        return cls(order, phase @ mu.weights)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __getitem__(self, pq: tuple[int, int]) -> complex:
        p, q = pq
        if abs(p) > self.order or abs(q) > self.order:
            raise KeyError(pq)
        return complex(self._values[p + self.order, q + self.order])

    def truncate(self, order: int) -> "MomentTable2D":
        if order > self.order:
            raise MeasureError("cannot extend a moment table")
        c = self.order
        return MomentTable2D(order, self._values[c - order:c + order + 1, c - order:c + order + 1])

    def hermitian_residual(self) -> float:
        flipped = self._values[::-1, ::-1]
        return float(np.max(np.abs(flipped - np.conj(self._values))))

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self._values)))

    def moment_matrix(self) -> np.ndarray:
        """Toeplitz-type matrix ``m[p - p', q - q']`` over the window ``|p|, |q| <= order // 2``."""
        half = self.order // 2
        idx = [(p, q) for p in range(-half, half + 1) for q in range(-half, half + 1)]
        mat = np.empty((len(idx), len(idx)), dtype=complex)
        for a, (p, q) in enumerate(idx):
            for b, (pp, qq) in enumerate(idx):
                mat[a, b] = self[p - pp, q - qq]
        return mat

    def min_eigenvalue(self) -> float:
        mat = self.moment_matrix()
        mat = 0.5 * (mat + mat.conj().T)
        return float(np.linalg.eigvalsh(mat)[0])

    def max_difference(self, other: "MomentTable2D", order: int | None = None) -> float:
        n = min(self.order, other.order) if order is None else order
        return float(np.max(np.abs(self.truncate(n).values - other.truncate(n).values)))

    def validity(self) -> dict:
        """Residuals used by the measure-validity checks."""
        return {
            "hermitian_residual": self.hermitian_residual(),
            "max_modulus": self.max_modulus(),
            "min_eigenvalue": self.min_eigenvalue(),
            "m00": complex(self[0, 0]),
        }

    def is_valid(self, hermitian_tol=1e-8, modulus_tol=1e-8, eig_tol=1e-7) -> bool:
        v = self.validity()
        return (
            v["hermitian_residual"] <= hermitian_tol
            and v["max_modulus"] <= 1.0 + modulus_tol
            and v["min_eigenvalue"] >= -eig_tol
        )

    def rows(self):
        """Yield ``(p, q, value)`` in lexicographic order."""
        for p in range(-self.order, self.order + 1):
            for q in range(-self.order, self.order + 1):
                yield p, q, self[p, q]
