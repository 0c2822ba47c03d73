"""Hypergeometric and combinatorial kernels.

Only real arguments are supported, on the domains the error-rate closed
forms need: ``z <= 1`` for the Gauss function and ``|x|, |y| <= 1`` for
the Appell function of the first kind.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate
from scipy.special import gamma, rgamma

from .errors import AccuracyError, DomainError

__all__ = [
    "SeriesAccuracy",
    "DEFAULT_ACCURACY",
    "gauss_2f1",
    "appell_f1",
    "gen_binomial",
    "pochhammer",
]

# Above this argument magnitude F1 switches from the double series to the
# single-integral representation.
F1_SERIES_LIMIT = 0.9


@dataclass(frozen=True)
class SeriesAccuracy:
    """Stopping rule for series evaluation.

    Parameters
    ----------
    rel_tol : float
        Target relative error, in ``(0, 1e-6]``.
    max_terms : int
        Cap on the number of terms per summation index (>= 100).
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise DomainError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 100:
            raise DomainError(f"max_terms must be >= 100, got {self.max_terms}")


DEFAULT_ACCURACY = SeriesAccuracy()


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _series_2f1(a, b, c, z, acc: SeriesAccuracy) -> float:
    """Plain hypergeometric series; caller guarantees ``|z| < 1``."""
    term = 1.0
    total = 1.0
    az = abs(z)
    for k in range(acc.max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if term == 0.0:
            return total
        ratio = abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2))) * az
        if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) <= acc.rel_tol * abs(total):
            return total
    raise AccuracyError(
        f"2F1({a}, {b}; {c}; {z}) series did not converge",
        partial=total,
        n_terms=acc.max_terms,
    )


def _quad_alg(func, alpha, beta, acc: SeriesAccuracy, what: str) -> float:
    """Integrate ``t**alpha (1-t)**beta func(t)`` over [0, 1] with QAWS."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            func, 0.0, 1.0, weight="alg", wvar=(alpha, beta),
            epsabs=0.0, epsrel=max(acc.rel_tol, 2e-14), limit=400,
        )
    if not math.isfinite(val) or err > 100 * max(acc.rel_tol, 2e-14) * abs(val):
        raise AccuracyError(f"{what}: integral representation failed", partial=val)
    return val


def _euler_2f1(a, b, c, z, acc: SeriesAccuracy) -> float:
    # requires c > b > 0
    if not c > b > 0:
        raise DomainError("Euler integral needs c > b > 0")
    val = _quad_alg(lambda t: (1.0 - z * t) ** (-a), b - 1.0, c - b - 1.0, acc,
                    f"2F1({a}, {b}; {c}; {z})")
    return val * gamma(c) * rgamma(b) * rgamma(c - b)


def gauss_2f1(a: float, b: float, c: float, z: float,
              acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real ``z <= 1``.

    Negative arguments are mapped into ``(0, 1/2]`` by the Pfaff
    transformation and summed directly up to ``z = 0.9``. Closer to 1 the
    ``1 - z`` connection formula is used when ``c - a - b`` is far from an
    integer, and the Euler integral otherwise. ``z = 1`` uses Gauss's
    summation theorem.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise DomainError(f"2F1 undefined for non-positive integer c={c}")
    if z > 1.0:
        raise DomainError(f"2F1 argument z={z} > 1 is outside the supported domain")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        if z == 1.0:
            # terminating series, Chu-Vandermonde
            return float(gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)) \
                if not _is_nonpos_int(c - a - b) else _series_2f1(a, b, c, z, acc)
        return _series_2f1(a, b, c, z, acc)
    if z == 1.0:
        s = c - a - b
        if s <= 0:
            raise DomainError(f"2F1 diverges at z=1 when c-a-b={s} <= 0")
        return float(gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b))
    if z < 0.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, w, acc)
    if z <= F1_SERIES_LIMIT:
        return _series_2f1(a, b, c, z, acc)

    s = c - a - b
    if abs(s - round(s)) > 0.05:
        # 1 - z connection formula; near-integer s is left to the Euler
        # integral because the two terms cancel catastrophically there
        w = 1.0 - z
        t1 = 0.0
        g1 = rgamma(c - a) * rgamma(c - b)
        if g1 != 0.0:
            t1 = gamma(c) * gamma(s) * g1 * _series_2f1(a, b, 1.0 - s, w, acc)
        t2 = 0.0
        g2 = rgamma(a) * rgamma(b)
        if g2 != 0.0:
            t2 = gamma(c) * gamma(-s) * g2 * w ** s * _series_2f1(c - a, c - b, s + 1.0, w, acc)
        return float(t1 + t2)
    if c > b > 0:
        return _euler_2f1(a, b, c, z, acc)
    if c > a > 0:
        return _euler_2f1(b, a, c, z, acc)
    return _series_2f1(a, b, c, z, acc)


def _appell_series(a, b1, b2, c, x, y, acc: SeriesAccuracy) -> float:
    # sum_i (a)_i (b1)_i / ((c)_i i!) x^i 2F1(a+i, b2; c+i; y)
    outer = 1.0
    total = _series_2f1(a, b2, c, y, acc) if y != 0.0 else 1.0
    ax = abs(x)
    small_run = 0
    for i in range(acc.max_terms):
        outer *= (a + i) * (b1 + i) / ((c + i) * (i + 1)) * x
        if outer == 0.0:
            return total
        inner = _series_2f1(a + i + 1, b2, c + i + 1, y, acc) if y != 0.0 else 1.0
        term = outer * inner
        total += term
        ratio = abs((a + i + 1) * (b1 + i + 1) / ((c + i + 1) * (i + 2))) * ax
        if ratio < 1.0 and abs(term) / (1.0 - ratio) <= acc.rel_tol * abs(total):
            small_run += 1
            if small_run >= 2:
                return total
        else:
            small_run = 0
    raise AccuracyError(
        f"F1({a}; {b1}, {b2}; {c}; {x}, {y}) double series did not converge",
        partial=total,
        n_terms=acc.max_terms,
    )


def _appell_integral(a, b1, b2, c, x, y, acc: SeriesAccuracy) -> float:
    if not c > a > 0:
        raise DomainError("F1 integral representation needs c > a > 0")
    val = _quad_alg(lambda t: (1.0 - x * t) ** (-b1) * (1.0 - y * t) ** (-b2),
                    a - 1.0, c - a - 1.0, acc, f"F1({a}; {b1}, {b2}; {c}; {x}, {y})")
    return float(val * gamma(c) * rgamma(a) * rgamma(c - a))


def appell_f1(a: float, b1: float, b2: float, c: float, x: float, y: float,
              acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Appell hypergeometric function of the first kind F1(a; b1, b2; c; x, y).

    Uses the double series while ``max(|x|, |y|) <= 0.9`` and the Euler-type
    single integral beyond that. ``x = 1`` (or ``y = 1``) is reduced to a
    Gauss function.
    """
    a, b1, b2, c, x, y = map(float, (a, b1, b2, c, x, y))
    if _is_nonpos_int(c):
        raise DomainError(f"F1 undefined for non-positive integer c={c}")
    if abs(x) > 1.0 or abs(y) > 1.0:
        raise DomainError(f"F1 arguments ({x}, {y}) outside the unit square")
    if y == 0.0 or b2 == 0.0:
        return gauss_2f1(a, b1, c, x, acc)
    if x == 0.0 or b1 == 0.0:
        return gauss_2f1(a, b2, c, y, acc)
    if x == 1.0 or y == 1.0:
        if x != 1.0:
            x, y, b1, b2 = y, x, b2, b1
        s = c - a - b1
        if s <= 0:
            raise DomainError(f"F1 diverges at x=1 when c-a-b1={s} <= 0")
        pref = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b1)
        if y == 1.0:
            return float(pref * gauss_2f1(a, b2, c - b1, 1.0, acc))
        return float(pref * gauss_2f1(a, b2, c - b1, y, acc))
    if max(abs(x), abs(y)) > F1_SERIES_LIMIT and c > a > 0:
        return _appell_integral(a, b1, b2, c, x, y, acc)
    # the variable with the smaller magnitude goes in the inner sum
    if abs(y) > abs(x):
        x, y, b1, b2 = y, x, b2, b1
    return _appell_series(a, b1, b2, c, x, y, acc)


def gen_binomial(n: float, k: int) -> float:
    """Generalized binomial coefficient ``Gamma(n+1) / (Gamma(k+1) Gamma(n-k+1))``.

    Integer ``0 <= n <= 60`` is handled exactly; otherwise the falling
    product ``n (n-1) ... (n-k+1) / k!`` is used, which equals the Gamma
    ratio wherever that is finite and returns 0 at its poles.
    """
    if k < 0 or not float(k).is_integer():
        raise DomainError(f"k must be a non-negative integer, got {k}")
    k = int(k)
    if float(n).is_integer() and 0 <= n <= 60:
        return float(math.comb(int(n), k))
    out = 1.0
    for j in range(k):
        out *= (n - j) / (j + 1)
    return out


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``(x)_n = Gamma(x+n) / Gamma(x)``, including negative ``n``.

    For ``n = -k`` this is ``1 / ((x-1)(x-2)...(x-k))``.
    """
    if not float(n).is_integer():
        raise DomainError(f"n must be an integer, got {n}")
    n = int(n)
    out = 1.0
    if n >= 0:
        for j in range(n):
            out *= x + j
        return out
    for j in range(1, -n + 1):
        d = x - j
        if d == 0.0:
            raise DomainError(f"(x)_n undefined for x={x}, n={n}")
        out /= d
    return out
