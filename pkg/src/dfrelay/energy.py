"""Energy per information bit for direct and relayed transmission.

The transmitter power amplifier draws ``(1 + alpha) P`` for radiated power
``P`` where ``alpha = papr / eta - 1``. Circuit blocks draw ``p_ctx``
(transmit chain) and ``p_crx`` (receive chain) while on, and the
synthesizers draw ``2 p_lo`` during the transient ``t_tr``. A packet of
``L`` bits keeps the radios on for ``T_on = L / (b B)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleError
from .link import FadingParams, LinkBudget
from .modulation import Modulation
from .ser import ber_approx_constant, ser_single_link

__all__ = [
    "EnergyProfile",
    "EnergyBreakdown",
    "DirectOptimum",
    "energy_direct",
    "energy_coop",
    "cooperation_gain",
    "min_energy_direct",
    "direct_power_for_target",
]


@dataclass(frozen=True)
class EnergyProfile:
    """Circuit power figures, amplifier efficiency, timing and power cap."""

    p_ctx: float = 0.1
    p_crx: float = 0.15
    p_lo: float = 0.05
    eta: float = 0.35
    t_tr: float = 5e-6
    packet_bits: int = 2000
    bandwidth: float = 2e5
    p_maxt: float = 1.0

    def __post_init__(self):
        for name in ("p_ctx", "p_crx", "p_lo", "t_tr"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        if not 0 < self.eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if self.packet_bits < 1 or self.bandwidth <= 0 or self.p_maxt <= 0:
            raise DomainError("packet_bits, bandwidth and p_maxt must be positive")

    def t_on(self, mod: Modulation) -> float:
        """Radio on-time per packet, ``L / (b B)`` seconds."""
        return self.packet_bits / (mod.bits * self.bandwidth)

    def alpha(self, mod: Modulation) -> float:
        """Amplifier overhead factor ``papr / eta - 1``."""
        return mod.papr / self.eta - 1.0

    @property
    def transient_energy(self) -> float:
        """Synthesizer start-up energy per packet, ``2 p_lo t_tr``."""
        return 2.0 * self.p_lo * self.t_tr


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy per bit (J/bit), split into amplifier and circuit parts.

    ``relay_forward_prob`` is the probability that the relay decodes and
    transmits (1 for direct transmission).
    """

    e_total_per_bit: float
    e_transmit: float
    e_circuit: float
    mode: str
    relay_forward_prob: float = 1.0


def energy_direct(p_s: float, profile: EnergyProfile, mod: Modulation) -> EnergyBreakdown:
    """Energy per bit of direct transmission with source power ``p_s``."""
    if p_s < 0:
        raise DomainError(f"p_s must be non-negative, got {p_s}")
    t_on = profile.t_on(mod)
    L = profile.packet_bits
    e_t = (1.0 + profile.alpha(mod)) * p_s * t_on / L
    e_c = ((profile.p_ctx + profile.p_crx) * t_on + profile.transient_energy) / L
    return EnergyBreakdown(e_t + e_c, e_t, e_c, "DT")


def energy_coop(p_s: float, p_r: float, budget: LinkBudget, fading: FadingParams,
                profile: EnergyProfile, mod: Modulation) -> EnergyBreakdown:
    """Energy per bit of relayed transmission.

    Phase one always costs the source transmit chain and two receive
    chains; phase two (relay transmit, destination receive) is paid only
    when the relay decodes correctly, i.e. with probability
    ``1 - SER_SR(p_s)``. Both phases share one on-time multiplier ``T_on``.
    ``budget`` supplies path losses and noise; its powers are ignored.
    """
    if p_s < 0 or p_r < 0:
        raise DomainError(f"powers must be non-negative, got ({p_s}, {p_r})")
    g = mod.g
    b = p_s * fading.omega_sr * g / (budget.pl_sr * fading.m_sr * budget.n0)
    forward = 1.0 - ser_single_link(b, fading.m_sr, mod)[0]
    return _coop_breakdown(p_s, p_r, forward, profile, mod)


def _coop_breakdown(p_s, p_r, forward, profile: EnergyProfile, mod: Modulation):
    t_on = profile.t_on(mod)
    L = profile.packet_bits
    amp = 1.0 + profile.alpha(mod)
    e_t = amp * (p_s + p_r * forward) * t_on / L
    circuit_power = profile.p_ctx + 2.0 * profile.p_crx + (profile.p_ctx + profile.p_crx) * forward
    e_c = (circuit_power * t_on + profile.transient_energy) / L
    return EnergyBreakdown(e_t + e_c, e_t, e_c, "CT", forward)


def cooperation_gain(e_dt, ber_dt: float, e_ct, ber_ct: float) -> float:
    """Ratio of delivered-bit energy efficiency, cooperative over direct.

    ``e_dt`` and ``e_ct`` are energies per bit (floats or
    :class:`EnergyBreakdown`).
    """
    if not (ber_dt < 1 and ber_ct < 1):
        raise DomainError("BERs must be < 1")
    e_dt = getattr(e_dt, "e_total_per_bit", e_dt)
    e_ct = getattr(e_ct, "e_total_per_bit", e_ct)
    return e_dt * (1.0 - ber_ct) / (e_ct * (1.0 - ber_dt))


@dataclass(frozen=True)
class DirectOptimum:
    """Smallest direct-link source power meeting a BER target, and its energy."""

    p_s: float
    energy: EnergyBreakdown
    feasible: bool

    @property
    def e_transmit(self) -> float:
        return self.energy.e_transmit

    @property
    def e_circuit(self) -> float:
        return self.energy.e_circuit


def direct_power_for_target(p_star: float, budget: LinkBudget, fading: FadingParams,
                            mod: Modulation) -> float:
    """Source power at which the closed-form direct BER approximation equals ``p_star``."""
    if not 0 < p_star < 1:
        raise DomainError(f"target BER must lie in (0, 1), got {p_star}")
    m = fading.m_sd
    const = ber_approx_constant(m, mod)
    snr = (const / p_star) ** (1.0 / m) - 1.0
    scale = m * budget.n0 * budget.pl_sd / (fading.omega_sd * mod.g)
    return max(snr, 0.0) * scale


def min_energy_direct(p_star: float, budget: LinkBudget, fading: FadingParams,
                      profile: EnergyProfile, mod: Modulation,
                      enforce_cap: bool = True) -> DirectOptimum:
    """Minimum energy per bit of direct transmission under a BER target.

    Raises :class:`InfeasibleError` (carrying the required power) when the
    needed source power exceeds ``profile.p_maxt`` and ``enforce_cap`` is
    set; otherwise the result is returned with ``feasible=False``.
    """
    p_s = direct_power_for_target(p_star, budget, fading, mod)
    feasible = p_s <= profile.p_maxt
    if not feasible and enforce_cap:
        raise InfeasibleError(
            f"direct link needs {p_s:.4g} W for BER {p_star:g}, cap is {profile.p_maxt:g} W",
            required=p_s)
    if not math.isfinite(p_s):
        raise InfeasibleError("required power is not finite", required=p_s)
    return DirectOptimum(p_s, energy_direct(p_s, profile, mod), feasible)
