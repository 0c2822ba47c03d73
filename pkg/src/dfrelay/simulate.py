"""Monte Carlo simulation of the two-phase decode-and-forward link.

Channel power gains are Gamma distributed (Nakagami-m amplitudes). The S-D
and R-D gains are drawn jointly with Pearson correlation ``rho``; the S-R
gain is independent. Each symbol is sent by the source, the relay makes a
hard decision and forwards only if that decision is correct, and the
destination combines both branches with MRC before a minimum-distance
decision.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .link import FadingParams, LinkBudget
from .modulation import Modulation

__all__ = [
    "McConfig",
    "McEstimate",
    "sample_correlated_gamma_pair",
    "simulate_df_link",
    "constellation",
    "detect",
]


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings.

    ``batch`` symbols are simulated per RNG stream; stream ``k`` is the
    ``k``-th child of ``SeedSequence(seed)``, so results do not depend on
    ``workers``. ``relay_idle`` forces the relay to stay silent, which
    reduces the link to direct transmission.
    """

    n_symbols: int = 1_000_000
    seed: int = 0
    batch: int = 1 << 18
    workers: int = 1
    relay_idle: bool = False
    method: str = "auto"

    def __post_init__(self):
        if self.n_symbols < 10_000:
            raise DomainError(f"n_symbols must be >= 1e4, got {self.n_symbols}")
        if self.batch < 1:
            raise DomainError(f"batch must be positive, got {self.batch}")
        if self.workers < 1:
            raise DomainError(f"workers must be positive, got {self.workers}")
        if self.method not in ("auto", "mixture", "gaussian"):
            raise DomainError(f"unknown sampling method {self.method!r}")

    @property
    def n_batches(self) -> int:
        return -(-self.n_symbols // self.batch)


@dataclass(frozen=True)
class McEstimate:
    """Symbol error estimate with its binomial standard error.

    ``relay_failures`` counts symbols the relay decoded incorrectly.
    """

    ser_hat: float
    std_err: float
    n_errors: int
    n_symbols: int
    relay_failures: int = 0

    @classmethod
    def from_counts(cls, n_errors: int, n_symbols: int, relay_failures: int = 0):
        p = n_errors / n_symbols
        return cls(p, math.sqrt(p * (1.0 - p) / n_symbols), n_errors, n_symbols, relay_failures)

    @property
    def relay_failure_rate(self) -> float:
        return self.relay_failures / self.n_symbols


# --------------------------------------------------------------------------
# correlated gamma pairs
# --------------------------------------------------------------------------

def _twice_is_integer(m: float) -> bool:
    return abs(2 * m - round(2 * m)) < 1e-12


def sample_correlated_gamma_pair(m: float, omega1: float, omega2: float, rho: float,
                                 rng: np.random.Generator, size: int = 1,
                                 method: str = "auto"):
    """Draw ``size`` pairs of Gamma(m, omega/m) variates with power correlation ``rho``.

    Methods
    -------
    ``"mixture"``
        Kibble's bivariate gamma as a Poisson-gamma mixture: draw
        ``N ~ NegBinomial(m, 1 - rho)``, then independently
        ``X_i ~ Gamma(m + N, (1 - rho) omega_i / m)``. Exact for any ``m > 0``;
        its joint MGF is the correlated MGF of the S-D / R-D pair.
    ``"gaussian"``
        Sum of ``2m`` squared zero-mean Gaussians per branch, paired with
        cross-correlation ``sqrt(rho)``. Needs ``2m`` to be an integer.
    ``"auto"``
        ``"gaussian"`` when ``2m`` is an integer, else ``"mixture"``.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    if m <= 0 or omega1 <= 0 or omega2 <= 0:
        raise DomainError("m and omegas must be positive")
    if method == "auto":
        method = "gaussian" if _twice_is_integer(m) else "mixture"
    if method == "mixture":
        if rho == 0.0:
            k = np.full(size, m)
        else:
            k = m + rng.negative_binomial(m, 1.0 - rho, size=size)
        x1 = rng.gamma(k, (1.0 - rho) * omega1 / m)
        x2 = rng.gamma(k, (1.0 - rho) * omega2 / m)
        return x1, x2
    if method == "gaussian":
        if not _twice_is_integer(m):
            raise DomainError(f"gaussian construction needs 2m integer, got m={m}")
        n = int(round(2 * m))
        r = math.sqrt(rho)
        g1 = rng.standard_normal((n, size))
        g2 = r * g1 + math.sqrt(1.0 - r * r) * rng.standard_normal((n, size))
        return (omega1 / n) * np.sum(g1 * g1, axis=0), (omega2 / n) * np.sum(g2 * g2, axis=0)
    raise DomainError(f"unknown sampling method {method!r}")


# --------------------------------------------------------------------------
# constellations
# --------------------------------------------------------------------------

def constellation(mod: Modulation) -> np.ndarray:
    """Unit average energy constellation points, indexed by symbol number."""
    M = mod.order
    if mod.is_qam:
        r = math.isqrt(M)
        levels = 2.0 * np.arange(r) - (r - 1)
        pts = (levels[:, None] + 1j * levels[None, :]).ravel()
        return pts / math.sqrt(2.0 * (M - 1) / 3.0)
    return np.exp(2j * np.pi * np.arange(M) / M)


def detect(z: np.ndarray, mod: Modulation) -> np.ndarray:
    """Minimum-distance decisions for equalised samples ``z``."""
    M = mod.order
    if mod.is_qam:
        r = math.isqrt(M)
        scale = math.sqrt(2.0 * (M - 1) / 3.0)

        def axis(v):
            return np.clip(np.rint((v * scale + (r - 1)) / 2.0), 0, r - 1).astype(np.int64)
        return axis(z.real) * r + axis(z.imag)
    k = np.rint(np.angle(z) * M / (2.0 * np.pi)).astype(np.int64)
    return np.mod(k, M)


# --------------------------------------------------------------------------
# link simulation
# --------------------------------------------------------------------------

def _noise(rng, n, n0):
    return math.sqrt(n0 / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _gains(rng, fading: FadingParams, n: int, method: str):
    if fading.m_sd == fading.m_rd:
        g_sd, g_rd = sample_correlated_gamma_pair(
            fading.m_sd, fading.omega_sd, fading.omega_rd, fading.rho, rng, n, method)
    elif fading.rho == 0.0:
        g_sd = rng.gamma(fading.m_sd, fading.omega_sd / fading.m_sd, n)
        g_rd = rng.gamma(fading.m_rd, fading.omega_rd / fading.m_rd, n)
    else:
        raise DomainError("correlated S-D / R-D links need m_sd == m_rd")
    g_sr = rng.gamma(fading.m_sr, fading.omega_sr / fading.m_sr, n)
    return g_sd, g_sr, g_rd


def _run_batch(args):
    seed_seq, n, budget, fading, mod, relay_idle, method = args
    rng = np.random.default_rng(seed_seq)
    pts = constellation(mod)
    sym = rng.integers(0, mod.order, n)
    x = pts[sym]
    g_sd, g_sr, g_rd = _gains(rng, fading, n, method)
    # received amplitudes after coherent phase removal
    amp_sd = np.sqrt(budget.p_s * g_sd / budget.pl_sd)
    amp_sr = np.sqrt(budget.p_s * g_sr / budget.pl_sr)
    amp_rd = np.sqrt(budget.p_r * g_rd / budget.pl_rd)

    y_sr = amp_sr * x + _noise(rng, n, budget.n0)
    with np.errstate(divide="ignore", invalid="ignore"):
        relay_ok = (detect(y_sr / amp_sr, mod) == sym) & (amp_sr > 0)
    if relay_idle:
        relay_ok[:] = False
    y_sd = amp_sd * x + _noise(rng, n, budget.n0)
    y_rd = amp_rd * x + _noise(rng, n, budget.n0)
    # MRC with the R-D branch present only when the relay forwards
    w_rd = np.where(relay_ok, amp_rd, 0.0)
    num = amp_sd * y_sd + w_rd * y_rd
    den = amp_sd * amp_sd + w_rd * w_rd
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(den > 0, num / den, 0.0)
    errors = int(np.count_nonzero(detect(z, mod) != sym))
    return errors, int(np.count_nonzero(~relay_ok))


def simulate_df_link(budget: LinkBudget, fading: FadingParams, mod: Modulation,
                     mc: McConfig = McConfig()) -> McEstimate:
    """Estimate the end-to-end SER of the relayed link by simulation."""
    children = np.random.SeedSequence(mc.seed).spawn(mc.n_batches)
    jobs = []
    for k, ss in enumerate(children):
        n = min(mc.batch, mc.n_symbols - k * mc.batch)
        jobs.append((ss, n, budget, fading, mod, mc.relay_idle, mc.method))
    if mc.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=mc.workers) as pool:
            results = list(pool.map(_run_batch, jobs))
    else:
        results = [_run_batch(j) for j in jobs]
    errors = sum(r[0] for r in results)
    relay_fail = sum(r[1] for r in results)
    return McEstimate.from_counts(errors, mc.n_symbols, relay_fail)
