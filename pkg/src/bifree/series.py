"""Truncated formal power series in one and two variables.

This is a second, self-contained engine: it never evaluates a transform at
a point, it only manipulates Taylor coefficients at the origin.  Products use
a fixed ascending summation order, so results are bitwise reproducible.  No
compensated summation is used; for the small orders involved here the
rounding error stays far below the tolerances of the cross-checks.

Two-variable series are truncated rectangularly: coefficient ``(p, q)`` is
kept whenever ``p <= N`` and ``q <= N``.  Every operation below is exact
through that truncation because coefficient ``(p, q)`` of a product or a
composition only depends on input coefficients ``(p', q')`` with
``p' <= p`` and ``q' <= q``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ORDER_1D = 16
DEFAULT_ORDER_2D = 12


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class Series1:
    """Power series ``c_0 + c_1 z + ... + c_N z^N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @classmethod
    def from_coeffs(cls, coeffs, order: int | None = None) -> "Series1":
        c = np.asarray(coeffs, dtype=complex).ravel()
        if order is None:
            order = len(c) - 1
        out = np.zeros(order + 1, dtype=complex)
        n = min(len(c), order + 1)
        out[:n] = c[:n]
        return cls(out)

    @classmethod
    def variable(cls, order: int = DEFAULT_ORDER_1D) -> "Series1":
        return cls.from_coeffs([0, 1], order)

    @classmethod
    def constant(cls, value, order: int = DEFAULT_ORDER_1D) -> "Series1":
        return cls.from_coeffs([value], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, Series1):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series1):
            return div(self, other)
        return scale(self, 1.0 / other)

    def __neg__(self):
        return scale(self, -1.0)

    def __call__(self, z):
        """Horner evaluation of the truncated polynomial."""
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc


@dataclass(frozen=True)
class Series2:
    """Power series ``sum c[p, q] z^p w^q`` truncated to ``p, q <= N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @classmethod
    def from_coeffs(cls, coeffs, order: int | None = None) -> "Series2":
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if order is None:
            order = max(c.shape) - 1
        out = np.zeros((order + 1, order + 1), dtype=complex)
        a, b = min(c.shape[0], order + 1), min(c.shape[1], order + 1)
        out[:a, :b] = c[:a, :b]
        return cls(out)

    @classmethod
    def constant(cls, value, order: int = DEFAULT_ORDER_2D) -> "Series2":
        return cls.from_coeffs([[value]], order)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, Series2):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series2):
            return div(self, other)
        return scale(self, 1.0 / other)

    def __neg__(self):
        return scale(self, -1.0)

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        acc = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        for p in range(self.order, -1, -1):
            row = np.zeros_like(acc)
            for c in self.coeffs[p, ::-1]:
                row = row * w + c
            acc = acc * z + row
        return acc


def _same_kind(a, b):
    if type(a) is not type(b):
        raise SeriesError("series of different kinds cannot be combined")
    if a.order != b.order:
        raise SeriesError("series orders differ")


def scale(a, c):
    return type(a)(a.coeffs * c)


def add(a, b):
    _same_kind(a, b)
    return type(a)(a.coeffs + b.coeffs)


def _mul1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        if a[i] != 0:
            out[i:] += a[i] * b[: n - i]
    return out


def _mul2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    out = np.zeros_like(a)
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0:
                out[i:, j:] += a[i, j] * b[: n - i, : n - j]
    return out


def mul(a, b):
    _same_kind(a, b)
    if isinstance(a, Series1):
        return Series1(_mul1(a.coeffs, b.coeffs))
    return Series2(_mul2(a.coeffs, b.coeffs))


def div(a, b):
    """Quotient ``a / b``; ``b`` must have a nonzero constant term."""
    _same_kind(a, b)
    if isinstance(a, Series1):
        b0 = b.coeffs[0]
        if b0 == 0:
            raise SeriesError("division by a series without constant term")
        n = len(a.coeffs)
        c = np.zeros(n, dtype=complex)
        for k in range(n):
            acc = a.coeffs[k]
            for j in range(1, k + 1):
                acc -= b.coeffs[j] * c[k - j]
            c[k] = acc / b0
        return Series1(c)
    b0 = b.coeffs[0, 0]
    if b0 == 0:
        raise SeriesError("division by a series without constant term")
    n = a.coeffs.shape[0]
    c = np.zeros_like(a.coeffs)
    bc = b.coeffs
    for p in range(n):
        for q in range(n):
            # sum over (i, j) != (0, 0) with i <= p, j <= q of b[i, j] c[p - i, q - j]
            block = bc[: p + 1, : q + 1] * c[p::-1, q::-1]
            c[p, q] = (a.coeffs[p, q] - (block.sum() - bc[0, 0] * c[p, q])) / b0
    return Series2(c)


def _nilpotent_powers(u, count):
    out = []
    term = type(u).constant(1.0, u.order) if isinstance(u, Series1) else Series2.constant(1.0, u.order)
    for _ in range(count + 1):
        out.append(term)
        term = mul(term, u)
    return out


def exp_series(a):
    """Exponential of a series (any constant term)."""
    if isinstance(a, Series1):
        n = a.order
        e = np.zeros(n + 1, dtype=complex)
        e[0] = cmath.exp(a.coeffs[0])
        for k in range(1, n + 1):
            acc = 0j
            for j in range(1, k + 1):
                acc += j * a.coeffs[j] * e[k - j]
            e[k] = acc / k
        return Series1(e)
    c0 = a.coeffs[0, 0]
    u = Series2(a.coeffs - np.pad([[c0]], ((0, a.order), (0, a.order))))
    total = Series2.constant(0.0, a.order)
    fact = 1.0
    for k, uk in enumerate(_nilpotent_powers(u, 2 * a.order)):
        if k:
            fact *= k
        total = add(total, scale(uk, 1.0 / fact))
    return scale(total, cmath.exp(c0))


def _check_log_constant(c0):
    if c0 == 0 or (c0.imag == 0 and c0.real < 0):
        raise SeriesError("logarithm of a series whose constant term lies on the branch cut")


def log_series(a):
    """Principal logarithm of a series whose constant term avoids ``(-inf, 0]``."""
    if isinstance(a, Series1):
        c0 = complex(a.coeffs[0])
        _check_log_constant(c0)
        n = a.order
        out = np.zeros(n + 1, dtype=complex)
        out[0] = cmath.log(c0)
        for k in range(1, n + 1):
            acc = k * a.coeffs[k]
            for j in range(1, k):
                acc -= j * out[j] * a.coeffs[k - j]
            out[k] = acc / (k * c0)
        return Series1(out)
    c0 = complex(a.coeffs[0, 0])
    _check_log_constant(c0)
    u = scale(a, 1.0 / c0)
    u = Series2(u.coeffs - np.pad([[1.0]], ((0, a.order), (0, a.order))))
    total = Series2.constant(cmath.log(c0), a.order)
    powers = _nilpotent_powers(u, 2 * a.order)
    for k in range(1, len(powers)):
        total = add(total, scale(powers[k], (-1) ** (k + 1) / k))
    return total


def compose1(outer: Series1, inner: Series1) -> Series1:
    """Taylor coefficients of ``outer(inner(z))``; ``inner`` must vanish at 0."""
    _same_kind(outer, inner)
    if inner.coeffs[0] != 0:
        raise SeriesError("inner series must have zero constant term")
    n = outer.order
    acc = np.zeros(n + 1, dtype=complex)
    for c in outer.coeffs[::-1]:
        acc = _mul1(acc, inner.coeffs)
        acc[0] += c
    return Series1(acc)


def power_matrix(s: Series1) -> np.ndarray:
    """Row k holds the coefficients of ``s**k`` for k = 0..N."""
    n = s.order
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[0, 0] = 1.0
    for k in range(1, n + 1):
        out[k] = _mul1(out[k - 1], s.coeffs)
    return out


def substitute2(f: Series2, zs: Series1, ws: Series1) -> Series2:
    """Coefficients of ``f(zs(z), ws(w))`` where both substitutions vanish at 0."""
    if zs.coeffs[0] != 0 or ws.coeffs[0] != 0:
        raise SeriesError("substituted series must have zero constant term")
    if not (f.order == zs.order == ws.order):
        raise SeriesError("series orders differ")
    pz = power_matrix(zs)
    pw = power_matrix(ws)
    return Series2(pz.T @ f.coeffs @ pw)


def derivative1(s: Series1) -> Series1:
    """Formal derivative; the top coefficient becomes zero."""
    n = s.order
    out = np.zeros(n + 1, dtype=complex)
    out[:n] = s.coeffs[1:] * np.arange(1, n + 1)
    return Series1(out)


def _check_revertible(f: Series1):
    if f.coeffs[0] != 0:
        raise SeriesError("series to revert must vanish at 0")
    if f.coeffs[1] == 0:
        raise SeriesError("series to revert must have nonzero linear term")


def revert_lagrange(f: Series1) -> Series1:
    """Compositional inverse by Lagrange inversion.

    With ``f = z * phi(z)``, the inverse ``g`` satisfies
    ``[z^n] g = (1/n) [z^(n-1)] phi(z)^(-n)``.
    """
    _check_revertible(f)
    n = f.order
    phi = Series1.from_coeffs(np.append(f.coeffs[1:], 0.0), n)
    inv_phi = div(Series1.constant(1.0, n), phi)
    out = np.zeros(n + 1, dtype=complex)
    powk = Series1.constant(1.0, n)
    for k in range(1, n + 1):
        powk = mul(powk, inv_phi)
        out[k] = powk.coeffs[k - 1] / k
    return Series1(out)


def revert_newton(f: Series1) -> Series1:
    """Compositional inverse by Newton iteration on series.

    Iterates ``g <- g - (f(g) - z) / f'(g)``; each step doubles the number of
    correct coefficients.
    """
    _check_revertible(f)
    n = f.order
    z = Series1.variable(n)
    g = scale(z, 1.0 / f.coeffs[1])
    fprime = derivative1(f)
    steps = int(math.ceil(math.log2(n + 1))) + 2
    for _ in range(steps):
        resid = add(compose1(f, g), scale(z, -1.0))
        g = add(g, scale(div(resid, compose1(fprime, g)), -1.0))
    return g


def revert(f: Series1, check: bool = True, tol: float = 1e-10) -> Series1:
    """Compositional inverse; Lagrange inversion, optionally cross-checked by Newton."""
    g = revert_lagrange(f)
    if check:
        h = revert_newton(f)
        scale_ref = max(1.0, float(np.max(np.abs(g.coeffs))))
        gap = float(np.max(np.abs(g.coeffs - h.coeffs)))
        if gap > tol * scale_ref:
            raise SeriesError(f"series inversion routes disagree by {gap:.3e}")
    return g


def to_csv_rows(s):
    """Rows ``(p[, q], re, im)`` for a debugging dump."""
    if isinstance(s, Series1):
        return [(k, c.real, c.imag) for k, c in enumerate(s.coeffs)]
    n = s.order
    return [(p, q, s.coeffs[p, q].real, s.coeffs[p, q].imag) for p in range(n + 1) for q in range(n + 1)]
