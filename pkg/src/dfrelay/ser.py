"""Average symbol and bit error rates for direct and relayed transmission.

Every average SER here is an averaging operator applied to a trigonometric
kernel:

* QAM: ``(4/pi) C int_0^{pi/2} v - (4/pi) C^2 int_0^{pi/4} v`` with
  ``C = 1 - 1/sqrt(M)``
* PSK: ``(1/pi) int_0^{(M-1)pi/M} v``

The cooperative SER combines the direct-link term, the source-relay term
and the jointly faded S-D plus R-D term as

    SER = SER_SD * SER_SR + SER_MRC * (1 - SER_SR)

where ``SER_MRC`` uses the kernel ``(1 + (a+c)/s^2 + a d/s^4)^(-m_c)``.
Bit error rates use Gray mapping, ``BER = SER / log2(M)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from scipy.special import gammaln

from .errors import AccuracyError, DomainError, InfeasibleError
from .integrals import (
    HALF_PI,
    QUARTER_PI,
    IntegralBounds,
    integral_I,
    integral_J,
    integral_K,
    integral_sin_power,
    psk_bounds,
    quadrature_oracle,
)
from .link import FadingParams, LinkBudget, SnrScalars, snr_scalars
from .modulation import Modulation
from .special import gauss_2f1

__all__ = [
    "Modulation",
    "SerResult",
    "EXACT",
    "ASYMPTOTIC",
    "QUADRATURE",
    "MONTE_CARLO",
    "average_operator",
    "ser_single_link",
    "ser_direct_exact",
    "ser_coop_exact",
    "ser_coop_uncorrelated",
    "ser_coop_asymptotic",
    "ser_direct_quadrature",
    "ser_coop_quadrature",
    "asymptotic_coefficients",
    "rho_from_targets",
    "ber_direct_approx",
    "ber_approx_constant",
]

EXACT = "exact-closed-form"
ASYMPTOTIC = "asymptotic"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class SerResult:
    """Average SER with its Gray-mapped BER and the evaluation method.

    ``warning`` is set when the value was clamped or is outside the
    regime where the method is meaningful.
    """

    ser: float
    ber: float
    method: str
    warning: str | None = None
    parts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.ser <= 1.0:
            raise DomainError(f"SER {self.ser} outside [0, 1]")

    @classmethod
    def make(cls, ser: float, mod: Modulation, method: str, warning=None, parts=None):
        ser = min(max(ser, 0.0), 1.0)
        return cls(ser, ser / mod.bits, method, warning, parts or {})


# --------------------------------------------------------------------------
# averaging operators
# --------------------------------------------------------------------------

def average_operator(mod: Modulation, integral: Callable[[IntegralBounds], float]) -> float:
    """Apply the QAM or PSK averaging operator to ``integral(bounds)``."""
    if mod.is_qam:
        c = 1.0 - 1.0 / math.sqrt(mod.order)
        return 4.0 / math.pi * c * (integral(HALF_PI) - c * integral(QUARTER_PI))
    return integral(psk_bounds(mod.order)) / math.pi


def _kernel_quadrature(mod: Modulation, kernel: str, **params) -> float:
    kind = "F_QAM-kernel" if mod.is_qam else "F_PSK-kernel"
    return quadrature_oracle(kind, dict(params, M=mod.order, kernel=kernel))


def _with_fallback(closed: Callable[[], float], oracle: Callable[[], float]):
    """Evaluate a closed form, falling back to quadrature outside its domain."""
    try:
        return closed(), EXACT
    except (DomainError, AccuracyError):
        return oracle(), QUADRATURE


def ser_single_link(snr: float, m: float, mod: Modulation) -> tuple[float, str]:
    """Average SER of one Nakagami-m link with scaled SNR ``snr``."""
    return _with_fallback(
        lambda: average_operator(mod, lambda bd: integral_I(snr, m, bd)),
        lambda: _kernel_quadrature(mod, "I", a=snr, m=m),
    )


def _mrc_term(a: float, b: float, m: float, mod: Modulation) -> tuple[float, str]:
    return _with_fallback(
        lambda: average_operator(mod, lambda bd: integral_J(a, b, m, bd)),
        lambda: _kernel_quadrature(mod, "J", a=a, b=b, m=m),
    )


def _combine(ser_sd, ser_sr, ser_mrc):
    return ser_sd * ser_sr + ser_mrc * (1.0 - ser_sr)


def _method(*methods):
    return QUADRATURE if QUADRATURE in methods else EXACT


# --------------------------------------------------------------------------
# exact forms
# --------------------------------------------------------------------------

def ser_direct_exact(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """SER of the direct source-destination link alone."""
    s = snr_scalars(budget, fading, mod)
    ser, method = ser_single_link(s.a, fading.m_sd, mod)
    return SerResult.make(ser, mod, method)


def ser_coop_from_scalars(s: SnrScalars, m_c: float, m_sr: float, mod: Modulation) -> SerResult:
    """Cooperative SER from precomputed SNR scalars (correlated closed form)."""
    ser_sd, m1 = ser_single_link(s.a, m_c, mod)
    ser_sr, m2 = ser_single_link(s.b, m_sr, mod)
    ser_mrc, m3 = _mrc_term(s.a + s.c, s.a * s.d, m_c, mod)
    parts = {"ser_sd": ser_sd, "ser_sr": ser_sr, "ser_mrc": ser_mrc}
    return SerResult.make(_combine(ser_sd, ser_sr, ser_mrc), mod, _method(m1, m2, m3),
                          parts=parts)


def ser_coop_exact(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """SER of decode-and-forward relaying with MRC over correlated S-D / R-D links.

    Uses the binomial/Appell closed form when ``2 m_c - 1/2`` is a
    non-negative integer and quadrature otherwise (``method`` tells which).

    Notes
    -----
    The model multiplies the average direct-link error by the average
    relay-failure probability, treating the two as independent. That is
    exact when every constellation point has the same error probability
    (4-QAM, M-PSK). For larger square QAM the corner and edge points fail
    less often than inner points on both links, so the two events are
    positively correlated through the transmitted symbol and a symbol-level
    simulation gives a slightly higher SER than this formula.
    """
    return ser_coop_from_scalars(snr_scalars(budget, fading, mod), fading.m_c, fading.m_sr, mod)


def ser_coop_uncorrelated(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """Cooperative SER for independent S-D and R-D links (``rho`` is ignored).

    The S-D and R-D shapes may differ; the closed form needs
    ``m_sd + m_rd - 1/2`` to be a non-negative integer.
    """
    s = snr_scalars(budget, fading, mod)
    ser_sd, m1 = ser_single_link(s.a, fading.m_sd, mod)
    ser_sr, m2 = ser_single_link(s.b, fading.m_sr, mod)
    ser_mrc, m3 = _with_fallback(
        lambda: average_operator(mod, lambda bd: integral_K(s.a, s.c, fading.m_sd, fading.m_rd, bd)),
        lambda: _kernel_quadrature(mod, "K", a=s.a, b=s.c, m=fading.m_sd, n=fading.m_rd),
    )
    parts = {"ser_sd": ser_sd, "ser_sr": ser_sr, "ser_mrc": ser_mrc}
    return SerResult.make(_combine(ser_sd, ser_sr, ser_mrc), mod, _method(m1, m2, m3),
                          parts=parts)


def ser_direct_quadrature(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """Direct-link SER by adaptive quadrature of the defining integral."""
    s = snr_scalars(budget, fading, mod)
    return SerResult.make(_kernel_quadrature(mod, "I", a=s.a, m=fading.m_sd), mod, QUADRATURE)


def ser_coop_quadrature(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """Cooperative SER with every averaged kernel integrated numerically."""
    s = snr_scalars(budget, fading, mod)
    m_c = fading.m_c
    ser_sd = _kernel_quadrature(mod, "I", a=s.a, m=m_c)
    ser_sr = _kernel_quadrature(mod, "I", a=s.b, m=fading.m_sr)
    ser_mrc = _kernel_quadrature(mod, "J", a=s.a + s.c, b=s.a * s.d, m=m_c)
    parts = {"ser_sd": ser_sd, "ser_sr": ser_sr, "ser_mrc": ser_mrc}
    return SerResult.make(_combine(ser_sd, ser_sr, ser_mrc), mod, QUADRATURE, parts=parts)


# --------------------------------------------------------------------------
# high-SNR asymptotes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Operator-averaged ``sin^(2k)`` integrals multiplying the power-law terms.

    ``direct`` for exponent ``2 m_c``, ``source_relay`` for ``2 m_sr`` and
    ``dual_hop`` for ``4 m_c``.
    """

    direct: float
    source_relay: float
    dual_hop: float


def asymptotic_coefficients(m_c: float, m_sr: float, mod: Modulation) -> AsymptoticCoefficients:
    def coef(k):
        return average_operator(mod, lambda bd: integral_sin_power(k, bd))
    return AsymptoticCoefficients(coef(m_c), coef(m_sr), coef(2.0 * m_c))


def _asymptotic_terms(s: SnrScalars, fading: FadingParams, mod: Modulation):
    """Return the (rho-free) first term and the dual-hop term before the rho factor."""
    m_c, m_sr = fading.m_c, fading.m_sr
    k = asymptotic_coefficients(m_c, m_sr, mod)
    first = k.direct * s.a ** (-m_c) * k.source_relay * s.b ** (-m_sr)
    second = k.dual_hop * (s.a * s.c) ** (-m_c)
    return first, second


def ser_coop_asymptotic(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SerResult:
    """Two-term high-SNR approximation of :func:`ser_coop_exact`.

    Values above 1 (small SNR, or ``rho`` near 1) are clamped to 1 and
    flagged in ``warning``.
    """
    s = snr_scalars(budget, fading, mod)
    if min(s.a, s.b, s.c) <= 0:
        return SerResult.make(1.0, mod, ASYMPTOTIC, warning="zero SNR: asymptote undefined")
    first, second = _asymptotic_terms(s, fading, mod)
    ser = first + second * (1.0 - fading.rho) ** (-fading.m_c)
    warning = None
    if not ser <= 1.0:
        warning = "asymptote exceeds 1 and was clamped; SNR too low for this approximation"
        ser = 1.0
    return SerResult.make(ser, mod, ASYMPTOTIC, warning=warning,
                          parts={"first": first, "second": second})


def rho_from_targets(ser_target: float, budget: LinkBudget, fading: FadingParams,
                     mod: Modulation) -> float:
    """Correlation coefficient at which the asymptotic SER equals ``ser_target``.

    The ``rho`` field of ``fading`` is ignored. Raises
    :class:`InfeasibleError` if no ``rho`` in ``[0, 1)`` reaches the target.
    """
    s = snr_scalars(budget, fading, mod)
    first, second = _asymptotic_terms(s, fading, mod)
    floor = first + second
    if ser_target <= first:
        raise InfeasibleError(f"target {ser_target:.6g} is at or below the rho-independent "
                              f"term {first:.6g}")
    if ser_target < floor * (1.0 - 1e-12):
        raise InfeasibleError(f"target {ser_target:.6g} is below the uncorrelated value "
                              f"{floor:.6g}", required=floor)
    one_minus = (second / (ser_target - first)) ** (1.0 / fading.m_c)
    return max(0.0, 1.0 - one_minus)


# --------------------------------------------------------------------------
# direct-link BER approximation
# --------------------------------------------------------------------------

def ber_approx_constant(m: float, mod: Modulation) -> float:
    """Constant ``C`` in ``BER ~= C / (1 + a)^m`` for square M-QAM."""
    if not mod.is_qam:
        raise DomainError("the direct-link BER approximation is defined for QAM only")
    r = math.sqrt(mod.order)
    h = gauss_2f1(0.5, 0.5 - m, 1.5, 0.5)
    gamma_ratio = math.exp(gammaln(m + 0.5) - gammaln(m + 1.0))
    bracket = (r - 1.0) * h / (math.sqrt(2.0) * math.pi) + gamma_ratio / (2.0 * math.sqrt(math.pi))
    return 4.0 * (r - 1.0) / (mod.order * mod.bits) * bracket


def ber_direct_approx(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> float:
    """Closed-form approximation of the direct-link QAM BER, accurate for ``a >> 1``."""
    s = snr_scalars(budget, fading, mod)
    return ber_approx_constant(fading.m_sd, mod) * (1.0 + s.a) ** (-fading.m_sd)
