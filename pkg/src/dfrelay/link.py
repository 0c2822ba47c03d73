"""Geometry, path loss, noise and per-link SNR scalars.

Units: powers in watts, distances in kilometres, losses as linear power
ratios. Decibels appear only in :func:`path_loss` and :func:`noise_power`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import DomainError
from .modulation import Modulation

__all__ = [
    "FadingParams",
    "Geometry",
    "LinkBudget",
    "SnrScalars",
    "PathLoss",
    "path_loss",
    "noise_power",
    "snr_scalars",
    "mgf_combined",
    "THERMAL_NOISE_DBM_HZ",
    "DEFAULT_BANDWIDTH",
    "DEFAULT_NOISE_FIGURE_DB",
]

THERMAL_NOISE_DBM_HZ = -174.0
DEFAULT_BANDWIDTH = 200e3
DEFAULT_NOISE_FIGURE_DB = 6.0


@dataclass(frozen=True)
class FadingParams:
    """Nakagami shapes, mean channel powers and S-D / R-D power correlation."""

    m_sd: float = 1.25
    m_sr: float = 1.25
    m_rd: float = 1.25
    omega_sd: float = 1.0
    omega_sr: float = 1.0
    omega_rd: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        for name in ("m_sd", "m_sr", "m_rd"):
            if getattr(self, name) < 0.5:
                raise DomainError(f"{name} must be >= 1/2, got {getattr(self, name)}")
        for name in ("omega_sd", "omega_sr", "omega_rd"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")

    @classmethod
    def uniform(cls, m: float, rho: float = 0.0) -> "FadingParams":
        """Same shape on all three links, unit mean powers."""
        return cls(m, m, m, rho=rho)

    @property
    def m_c(self) -> float:
        """Common shape of the S-D and R-D links required by the correlated forms."""
        if self.m_sd != self.m_rd:
            raise DomainError(f"correlated forms need m_sd == m_rd ({self.m_sd} != {self.m_rd})")
        return self.m_sd


@dataclass(frozen=True)
class Geometry:
    """Collinear source, relay, destination; ``f`` is the relay's fractional position."""

    d_sd: float
    f: float = 0.5

    def __post_init__(self):
        if self.d_sd <= 0:
            raise DomainError(f"d_sd must be positive, got {self.d_sd}")
        if not 0.0 < self.f < 1.0:
            raise DomainError(f"f must lie in (0, 1), got {self.f}")

    @property
    def d_sr(self) -> float:
        return self.f * self.d_sd

    @property
    def d_rd(self) -> float:
        return (1.0 - self.f) * self.d_sd


class PathLoss(NamedTuple):
    db: float
    linear: float


def path_loss(d_km: float) -> PathLoss:
    """Distance-power-law loss ``148 + 40 log10(d)`` dB with ``d`` in km."""
    if d_km <= 0:
        raise DomainError(f"distance must be positive, got {d_km}")
    db = 148.0 + 40.0 * math.log10(d_km)
    return PathLoss(db, 10.0 ** (db / 10.0))


def noise_power(n0_density_dbm_hz: float = THERMAL_NOISE_DBM_HZ,
                bandwidth: float = DEFAULT_BANDWIDTH,
                noise_figure_db: float = DEFAULT_NOISE_FIGURE_DB) -> float:
    """Receiver noise power in watts over ``bandwidth`` Hz."""
    if bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    mw_per_hz = 10.0 ** ((n0_density_dbm_hz + noise_figure_db) / 10.0)
    return mw_per_hz * bandwidth * 1e-3


@dataclass(frozen=True)
class LinkBudget:
    """Linear path losses, noise power and transmit powers of one relay link."""

    pl_sd: float
    pl_sr: float
    pl_rd: float
    n0: float
    p_s: float = 0.0
    p_r: float = 0.0

    def __post_init__(self):
        for name in ("pl_sd", "pl_sr", "pl_rd"):
            if getattr(self, name) < 1.0:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n0 <= 0:
            raise DomainError(f"n0 must be positive, got {self.n0}")
        if self.p_s < 0 or self.p_r < 0:
            raise DomainError(f"powers must be non-negative, got ({self.p_s}, {self.p_r})")

    @classmethod
    def from_geometry(cls, geom: Geometry, p_s: float = 0.0, p_r: float = 0.0,
                      n0: float | None = None) -> "LinkBudget":
        """Budget with path losses from the collinear layout.

        ``n0`` defaults to thermal noise over 200 kHz with a 6 dB noise figure.
        """
        if n0 is None:
            n0 = noise_power()
        return cls(path_loss(geom.d_sd).linear, path_loss(geom.d_sr).linear,
                   path_loss(geom.d_rd).linear, n0, p_s, p_r)

    def with_powers(self, p_s: float, p_r: float) -> "LinkBudget":
        return replace(self, p_s=p_s, p_r=p_r)


@dataclass(frozen=True)
class SnrScalars:
    """Per-link average SNRs scaled by ``g / m``.

    ``a``: S-D, ``b``: S-R, ``c``: R-D, ``d = (1 - rho) c``.
    """

    a: float
    b: float
    c: float
    d: float


def snr_scalars(budget: LinkBudget, fading: FadingParams, mod: Modulation) -> SnrScalars:
    g = mod.g
    a = budget.p_s * fading.omega_sd * g / (budget.pl_sd * fading.m_sd * budget.n0)
    b = budget.p_s * fading.omega_sr * g / (budget.pl_sr * fading.m_sr * budget.n0)
    c = budget.p_r * fading.omega_rd * g / (budget.pl_rd * fading.m_rd * budget.n0)
    return SnrScalars(a, b, c, (1.0 - fading.rho) * c)


def mgf_combined(s: float, budget: LinkBudget, fading: FadingParams) -> float:
    """MGF of the combined S-D plus R-D SNR at the destination, for ``s < 0``."""
    if s >= 0:
        raise DomainError(f"MGF is evaluated for s < 0, got {s}")
    m = fading.m_c
    g_sd = budget.p_s * fading.omega_sd / (budget.n0 * budget.pl_sd)
    g_rd = budget.p_r * fading.omega_rd / (budget.n0 * budget.pl_rd)
    base = 1.0 - (g_sd + g_rd) * s / m + (1.0 - fading.rho) * g_sd * g_rd * s * s / (m * m)
    return base ** (-m)
