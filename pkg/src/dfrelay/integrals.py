"""Trigonometric integrals behind the average error-rate expressions.

With ``s = sin(theta)``, the integrands are

* ``I``: ``(1 + a/s^2)^(-m)``
* ``J``: ``(1 + a/s^2 + b/s^4)^(-m)``
* ``K``: ``(1 + a/s^2)^(-m) (1 + b/s^2)^(-n)``
* ``sin_power``: ``s^(2m)``

Each closed form is an antiderivative in ``x = cos(theta)`` built from
Appell or Gauss functions, evaluated at both bounds and subtracted. The
substitution ``t = cos(theta)`` turns ``s^(2k+1) d(theta)`` into
``-(1 - t^2)^k dt``, which is why ``J`` needs ``2m - 1/2`` and ``K`` needs
``m + n - 1/2`` to be a non-negative integer: the numerator then expands
into a finite binomial sum.

:func:`quadrature_oracle` integrates the same functions numerically and is
the independent check for all of the above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError
from .special import (DEFAULT_ACCURACY, F1_SERIES_LIMIT, SeriesAccuracy, appell_f1, gauss_2f1,
                      gen_binomial)

__all__ = [
    "IntegralBounds",
    "HALF_PI",
    "QUARTER_PI",
    "psk_bounds",
    "integral_I",
    "integral_J",
    "integral_K",
    "integral_sin_power",
    "quadrature_oracle",
    "binomial_order",
]

_INT_TOL = 1e-9
# Relative accuracy requested from each Appell value inside the binomial
# sums, and the per-term error assumed by the cancellation check for the
# series and integral-representation paths respectively.
_INNER_TOL = 1e-15
_SERIES_ERROR = 4e-15
_QUAD_ERROR = 2e-14


@dataclass(frozen=True)
class IntegralBounds:
    """Integration interval in radians, ``0 <= lower < upper <= pi``."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower < self.upper <= math.pi + 1e-15):
            raise DomainError(f"invalid bounds ({self.lower}, {self.upper})")

    @property
    def width(self) -> float:
        return self.upper - self.lower


HALF_PI = IntegralBounds(0.0, math.pi / 2)
QUARTER_PI = IntegralBounds(0.0, math.pi / 4)


def psk_bounds(order: int) -> IntegralBounds:
    """Interval ``(0, (M-1) pi / M)`` used by the PSK averaging operator."""
    return IntegralBounds(0.0, (order - 1) * math.pi / order)


def _cos(theta: float) -> float:
    # exact values at the landmarks so the pi/2 term vanishes identically
    if theta == 0.0:
        return 1.0
    if math.isclose(theta, math.pi / 2, rel_tol=0, abs_tol=1e-15):
        return 0.0
    if math.isclose(theta, math.pi / 4, rel_tol=0, abs_tol=1e-15):
        return math.sqrt(0.5)
    if math.isclose(theta, math.pi, rel_tol=0, abs_tol=1e-15):
        return -1.0
    return math.cos(theta)


def _cos_sq(theta: float, x: float) -> float:
    if math.isclose(theta, math.pi / 4, rel_tol=0, abs_tol=1e-15):
        return 0.5
    return x * x


def binomial_order(value: float) -> int | None:
    """Return ``value`` as an int if it is a non-negative integer, else None."""
    r = round(value)
    if r >= 0 and abs(value - r) <= _INT_TOL:
        return int(r)
    return None


def _checked_definite(antiderivative, bounds: IntegralBounds, what: str,
                      acc: SeriesAccuracy) -> float:
    """Difference of antiderivative values with a cancellation check.

    ``antiderivative(theta)`` returns its value (written in x = cos(theta),
    which decreases with theta) and its hypergeometric argument. A short
    interval next to 0 yields a tiny integral as the difference of two
    O(1) numbers; an accuracy error is raised when the estimated relative
    error exceeds ``1000 * acc.rel_tol``.
    """
    h_lo, u_lo = antiderivative(bounds.lower)
    h_hi, u_hi = antiderivative(bounds.upper)
    total = h_lo - h_hi
    error = sum(abs(h) * (_QUAD_ERROR if u > F1_SERIES_LIMIT else _SERIES_ERROR)
                for h, u in ((h_lo, u_lo), (h_hi, u_hi)))
    if error > 1000 * acc.rel_tol * abs(total):
        raise AccuracyError(f"{what}: closed form loses too many digits to cancellation",
                            partial=total)
    return total


def _binomial_definite(term, coeffs, bounds: IntegralBounds, what: str,
                       acc: SeriesAccuracy) -> float:
    """Subtract two binomial-sum antiderivatives and check for cancellation.

    ``term(l, u)`` returns the Appell factor of the l-th summand at
    ``u = cos(theta)^2`` together with its larger argument. The alternating
    sum can cancel badly (near-degenerate roots, or a short interval next
    to 0 where the integrand is tiny); when the estimated relative error
    exceeds ``1000 * acc.rel_tol`` an accuracy error is raised so the
    caller can integrate numerically instead.
    """
    total = 0.0
    error = 0.0
    for theta, sign in ((bounds.lower, 1.0), (bounds.upper, -1.0)):
        x = _cos(theta)
        if x == 0.0:
            continue
        u = _cos_sq(theta, x)
        for l, cl in enumerate(coeffs):
            try:
                f1, arg = term(l, u)
            except DomainError as exc:
                # an Appell argument rounded onto or past 1: a nearly vanishing
                # root makes the sum ill-conditioned rather than undefined
                raise AccuracyError(f"{what}: ill-conditioned closed form ({exc})",
                                    partial=total) from None
            v = sign * cl * x ** (2 * l + 1) * f1
            total += v
            error += abs(v) * (_QUAD_ERROR if arg > F1_SERIES_LIMIT else _SERIES_ERROR)
    if error > 1000 * acc.rel_tol * abs(total):
        raise AccuracyError(f"{what}: closed form loses too many digits to cancellation",
                            partial=total)
    return total


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def integral_I(a: float, m: float, bounds: IntegralBounds = HALF_PI,
               acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Integral of ``(1 + a / sin^2)^(-m)`` over ``bounds``."""
    if a < 0:
        raise DomainError(f"a must be non-negative, got {a}")
    if m <= 0:
        raise DomainError(f"m must be positive, got {m}")
    scale = (1.0 + a) ** (-m)
    inner = SeriesAccuracy(_INNER_TOL, acc.max_terms)

    def anti(theta):
        x = _cos(theta)
        if x == 0.0:
            return 0.0, 0.0
        u = _cos_sq(theta, x)
        return x * appell_f1(0.5, 0.5 - m, m, 1.5, u, u / (1.0 + a), inner) * scale, u

    return _checked_definite(anti, bounds, f"I(a={a}, m={m})", acc)


def integral_J(a: float, b: float, m: float, bounds: IntegralBounds = HALF_PI,
               acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Integral of ``(1 + a / sin^2 + b / sin^4)^(-m)`` over ``bounds``.

    Requires ``2m - 1/2`` to be a non-negative integer and ``a^2 >= 4b`` so
    the quadratic ``s^4 + a s^2 + b`` factors over the reals.
    """
    n = binomial_order(2.0 * m - 0.5)
    if n is None:
        raise DomainError(f"closed form needs 2m - 1/2 in N (m={m}); use quadrature")
    if a < 0 or b < 0:
        raise DomainError(f"a, b must be non-negative, got ({a}, {b})")
    if b == 0.0:
        return integral_I(a, m, bounds, acc)
    disc = a * a - 4.0 * b
    if disc < 0:
        raise DomainError(f"a^2 < 4b ({a}, {b}); closed form needs real roots")
    root = math.sqrt(disc)
    # 1 + r for the two roots r of r^2 - a r + b; the smaller one is written
    # via the product to avoid cancellation when b << a^2
    u_big = (2.0 + a + root) / 2.0
    u_small = (1.0 + a + b) / u_big
    scale = (1.0 + a + b) ** (-m)
    coeffs = [gen_binomial(n, l) * (-1.0) ** l / (2 * l + 1) for l in range(n + 1)]
    inner = SeriesAccuracy(_INNER_TOL, acc.max_terms)

    def term(l, u):
        return appell_f1(l + 0.5, m, m, l + 1.5, u / u_small, u / u_big, inner), u / u_small

    return scale * _binomial_definite(term, coeffs, bounds, f"J(a={a}, b={b}, m={m})", acc)


def integral_K(a: float, b: float, m: float, n: float,
               bounds: IntegralBounds = HALF_PI,
               acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Integral of ``(1 + a / sin^2)^(-m) (1 + b / sin^2)^(-n)`` over ``bounds``.

    Requires ``m + n - 1/2`` to be a non-negative integer.
    """
    order = binomial_order(m + n - 0.5)
    if order is None:
        raise DomainError(f"closed form needs m + n - 1/2 in N (m={m}, n={n}); use quadrature")
    if a < 0 or b < 0:
        raise DomainError(f"a, b must be non-negative, got ({a}, {b})")
    scale = (1.0 + a) ** (-m) * (1.0 + b) ** (-n)
    coeffs = [gen_binomial(order, l) * (-1.0) ** l / (2 * l + 1) for l in range(order + 1)]
    inner = SeriesAccuracy(_INNER_TOL, acc.max_terms)

    def term(l, u):
        x1, x2 = u / (1.0 + a), u / (1.0 + b)
        return appell_f1(l + 0.5, m, n, l + 1.5, x1, x2, inner), max(x1, x2)

    return scale * _binomial_definite(term, coeffs, bounds,
                                      f"K(a={a}, b={b}, m={m}, n={n})", acc)


def integral_sin_power(m: float, bounds: IntegralBounds = HALF_PI,
                       acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Integral of ``sin(theta)^(2m)`` over ``bounds``, ``m >= 0``.

    The running integral from 0 is written in ``s = sin(theta)`` below
    ``pi/4`` and in ``x = cos(theta)`` above it, so both hypergeometric
    arguments stay at or below 1/2 and short intervals next to 0 lose no
    digits to cancellation.
    """
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    inner = SeriesAccuracy(_INNER_TOL, acc.max_terms)
    half = 0.5 * math.sqrt(math.pi) * math.exp(math.lgamma(m + 0.5) - math.lgamma(m + 1.0))

    def running(theta):
        if theta == 0.0:
            return 0.0
        if theta <= math.pi / 4:
            s = math.sin(theta)
            return s ** (2 * m + 1) / (2 * m + 1) * gauss_2f1(0.5, m + 0.5, m + 1.5, s * s, inner)
        x = _cos(theta)
        return half - x * gauss_2f1(0.5, 0.5 - m, 1.5, _cos_sq(theta, x), inner)

    g_lo, g_hi = running(bounds.lower), running(bounds.upper)
    total = g_hi - g_lo
    if _SERIES_ERROR * (abs(g_lo) + abs(g_hi)) > 1000 * acc.rel_tol * abs(total):
        raise AccuracyError(f"sin_power(m={m}): closed form loses too many digits to cancellation",
                            partial=total)
    return total


# --------------------------------------------------------------------------
# quadrature oracle
# --------------------------------------------------------------------------

def _kernel(kind: str, params: dict):
    """Vectorised integrand for ``kind``, written in a form that is finite at 0."""
    if kind == "I":
        a, m = params["a"], params["m"]
        return lambda t: (np.sin(t) ** 2 / (np.sin(t) ** 2 + a)) ** m
    if kind == "J":
        a, b, m = params["a"], params["b"], params["m"]

        def f(t):
            s2 = np.sin(t) ** 2
            return (s2 * s2 / (s2 * s2 + a * s2 + b)) ** m
        return f
    if kind == "K":
        a, b, m, n = params["a"], params["b"], params["m"], params["n"]

        def f(t):
            s2 = np.sin(t) ** 2
            return (s2 / (s2 + a)) ** m * (s2 / (s2 + b)) ** n
        return f
    if kind == "sin_power":
        m = params["m"]
        return lambda t: np.abs(np.sin(t)) ** (2 * m)
    raise DomainError(f"unknown integrand id {kind!r}")


def _quad(func, lo, hi, tol=1e-12, limit=200):
    val, err, info = integrate.quad(func, lo, hi, epsabs=tol, epsrel=tol,
                                    limit=limit, full_output=True)[:3]
    if err > 100 * max(tol, tol * abs(val)):
        raise AccuracyError(f"quadrature tolerance not met (err={err:.3g})",
                            partial=val, n_terms=info["last"])
    return val


def quadrature_oracle(kind: str, params: dict, bounds: IntegralBounds = HALF_PI) -> float:
    """Adaptive Gauss-Kronrod estimate of one of the integrals above.

    ``kind`` is one of ``"I"``, ``"J"``, ``"K"``, ``"sin_power"``,
    ``"F_QAM-kernel"`` or ``"F_PSK-kernel"``. The two operator kinds apply
    the QAM or PSK averaging operator to an inner kernel: ``params`` then
    holds ``"M"`` (constellation order), ``"kernel"`` (one of the first
    four ids) and that kernel's parameters; ``bounds`` is ignored.
    """
    if kind == "F_QAM-kernel":
        order = params["M"]
        f = _kernel(params["kernel"], params)
        c = 1.0 - 1.0 / math.sqrt(order)
        half = _quad(f, 0.0, math.pi / 2)
        quarter = _quad(f, 0.0, math.pi / 4)
        return 4.0 / math.pi * c * half - 4.0 / math.pi * c * c * quarter
    if kind == "F_PSK-kernel":
        order = params["M"]
        f = _kernel(params["kernel"], params)
        return _quad(f, 0.0, (order - 1) * math.pi / order) / math.pi
    return _quad(_kernel(kind, params), bounds.lower, bounds.upper)
