"""Optimal power allocation for the relayed link.

The problem: minimise the cooperative energy per bit over source and relay
powers, subject to the end-to-end BER equalling a target and the total
power staying under a cap.

Solution strategy. Write the split as ``theta = P_S / (P_S + P_R)``. For a
fixed ``theta`` the BER falls monotonically with the total power, so the
total power on the BER contour follows from a bracketing root find. The
energy along the contour is then a one-dimensional function of ``theta``,
minimised by a coarse grid scan, bounded Brent refinement and a final
Newton step on its derivative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .energy import EnergyProfile, energy_coop, min_energy_direct
from .errors import DomainError, InfeasibleError
from .link import FadingParams, Geometry, LinkBudget, SnrScalars, noise_power
from .modulation import Modulation
from .ser import ser_coop_from_scalars

__all__ = [
    "OpaProblem",
    "OpaResult",
    "ConvexityReport",
    "SweepRow",
    "solve_opa",
    "kkt_check",
    "convexity_probe",
    "contour_total_power",
    "sweep_distance",
    "crossover_distance",
    "direct_max_reach",
    "direct_row",
    "crossover_by_root",
    "ct_minus_dt",
]

P_MIN = 1e-9
THETA_GRID = 41
THETA_TOL = 1e-5


@dataclass(frozen=True)
class OpaProblem:
    """Power allocation instance: target BER, geometry, channel, energy profile."""

    p_star: float
    geometry: Geometry
    fading: FadingParams = field(default_factory=FadingParams)
    profile: EnergyProfile = field(default_factory=EnergyProfile)
    mod: Modulation = field(default_factory=Modulation)
    n0: float | None = None

    def __post_init__(self):
        if not 0.0 < self.p_star < 0.5:
            raise DomainError(f"target BER must lie in (0, 0.5), got {self.p_star}")
        if self.n0 is None:
            object.__setattr__(self, "n0", noise_power(bandwidth=self.profile.bandwidth))

    @property
    def p_maxt(self) -> float:
        return self.profile.p_maxt

    @property
    def budget(self) -> LinkBudget:
        return LinkBudget.from_geometry(self.geometry, n0=self.n0)

    def at_distance(self, d_sd: float, f: float | None = None, rho: float | None = None):
        geom = Geometry(d_sd, self.geometry.f if f is None else f)
        fading = self.fading if rho is None else replace(self.fading, rho=rho)
        return replace(self, geometry=geom, fading=fading)

    # -- model evaluations -------------------------------------------------

    def _scalars(self, p_s: float, p_r: float) -> SnrScalars:
        bd, fd, g = self.budget, self.fading, self.mod.g
        a = p_s * fd.omega_sd * g / (bd.pl_sd * fd.m_sd * bd.n0)
        b = p_s * fd.omega_sr * g / (bd.pl_sr * fd.m_sr * bd.n0)
        c = p_r * fd.omega_rd * g / (bd.pl_rd * fd.m_rd * bd.n0)
        return SnrScalars(a, b, c, (1.0 - fd.rho) * c)

    def ber(self, p_s: float, p_r: float) -> float:
        """End-to-end BER of the relayed link (exact SER over bits per symbol)."""
        res = ser_coop_from_scalars(self._scalars(p_s, p_r), self.fading.m_c,
                                    self.fading.m_sr, self.mod)
        return res.ber

    def energy(self, p_s: float, p_r: float) -> float:
        return energy_coop(p_s, p_r, self.budget, self.fading, self.profile,
                           self.mod).e_total_per_bit

    def mean_power(self, p_s: float, p_r: float) -> float:
        """Average consumed power of the two-phase scheme (watts)."""
        e = energy_coop(p_s, p_r, self.budget, self.fading, self.profile, self.mod)
        L = self.profile.packet_bits
        return (e.e_total_per_bit * L - self.profile.transient_energy) / self.profile.t_on(self.mod)


@dataclass(frozen=True)
class OpaResult:
    """Outcome of :func:`solve_opa`.

    ``kkt_residual`` is the scaled first-order optimality residual from
    :func:`kkt_check` (NaN when infeasible). ``multipliers`` holds the
    recovered BER and power-cap multipliers.
    """

    p_s_opt: float
    p_r_opt: float
    achieved_ber: float
    energy_per_bit: float
    kkt_residual: float
    active_power_cap: bool
    feasible: bool
    theta: float = float("nan")
    multipliers: dict = field(default_factory=dict, compare=False)

    @property
    def p_total(self) -> float:
        return self.p_s_opt + self.p_r_opt


# --------------------------------------------------------------------------
# contour construction
# --------------------------------------------------------------------------

def contour_total_power(problem: OpaProblem, theta: float, cap: float | None = None) -> float | None:
    """Total power putting ``(theta P, (1-theta) P)`` on the BER contour.

    Returns None when even ``cap`` (default ``p_maxt``) is not enough.
    """
    cap = problem.p_maxt if cap is None else cap
    target = math.log(problem.p_star)

    def h(log_p):
        p = math.exp(log_p)
        return math.log(max(problem.ber(theta * p, (1.0 - theta) * p), 1e-300)) - target

    hi = math.log(cap)
    if h(hi) > 0:
        return None
    lo = math.log(P_MIN)
    if h(lo) <= 0:
        return P_MIN
    return math.exp(optimize.brentq(h, lo, hi, xtol=1e-13, rtol=1e-13, maxiter=200))


def _contour_energy(problem: OpaProblem, theta: float):
    p = contour_total_power(problem, theta)
    if p is None:
        return math.inf, None
    return problem.energy(theta * p, (1.0 - theta) * p), p


def _cap_boundary(problem: OpaProblem, t_ok: float, t_bad: float) -> float:
    """Split at which the contour total power equals the cap, between two grid points."""
    cap = problem.p_maxt

    def h(t):
        return math.log(problem.ber(t * cap, (1.0 - t) * cap)) - math.log(problem.p_star)

    return optimize.brentq(h, min(t_ok, t_bad), max(t_ok, t_bad), xtol=1e-12)


def _newton_polish(problem: OpaProblem, theta: float, energy: float, lo: float, hi: float):
    """One safeguarded Newton step on dE/dtheta along the contour."""
    h = min(1e-4, 0.25 * (hi - lo))
    if h <= 0:
        return theta, energy
    e_m, _ = _contour_energy(problem, theta - h)
    e_p, _ = _contour_energy(problem, theta + h)
    if not (math.isfinite(e_m) and math.isfinite(e_p)):
        return theta, energy
    d1 = (e_p - e_m) / (2 * h)
    d2 = (e_p - 2 * energy + e_m) / (h * h)
    if d2 <= 0:
        return theta, energy
    t_new = min(max(theta - d1 / d2, lo), hi)
    e_new, _ = _contour_energy(problem, t_new)
    if e_new < energy:
        return t_new, e_new
    return theta, energy


def solve_opa(problem: OpaProblem, theta_grid: int = THETA_GRID,
              check_kkt: bool = True) -> OpaResult:
    """Minimum-energy power split meeting the BER target under the power cap."""
    thetas = np.linspace(0.01, 0.99, theta_grid)
    energies = [_contour_energy(problem, t)[0] for t in thetas]
    finite = [i for i, e in enumerate(energies) if math.isfinite(e)]
    if not finite:
        return _infeasible_result(problem, thetas)

    i = min(finite, key=lambda k: energies[k])
    lo = thetas[max(i - 1, 0)]
    hi = thetas[min(i + 1, len(thetas) - 1)]
    # shrink the bracket to the feasible part when a neighbour is over the cap
    if i > 0 and not math.isfinite(energies[i - 1]):
        lo = _cap_boundary(problem, thetas[i], thetas[i - 1])
    if i < len(thetas) - 1 and not math.isfinite(energies[i + 1]):
        hi = _cap_boundary(problem, thetas[i], thetas[i + 1])

    res = optimize.minimize_scalar(lambda t: _contour_energy(problem, t)[0],
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": THETA_TOL})
    theta, e_best = float(res.x), float(res.fun)
    if energies[i] < e_best:
        theta, e_best = float(thetas[i]), energies[i]
    theta, e_best = _newton_polish(problem, theta, e_best, lo, hi)

    p_tot = contour_total_power(problem, theta)
    p_s, p_r = theta * p_tot, (1.0 - theta) * p_tot
    active = p_tot >= problem.p_maxt * (1.0 - 1e-6)
    result = OpaResult(p_s, p_r, problem.ber(p_s, p_r), problem.energy(p_s, p_r),
                       float("nan"), active, True, theta)
    if check_kkt:
        resid, mult = kkt_check((p_s, p_r), problem, return_multipliers=True)
        result = replace(result, kkt_residual=resid, multipliers=mult)
    return result


def _infeasible_result(problem: OpaProblem, thetas) -> OpaResult:
    cap = problem.p_maxt
    res = optimize.minimize_scalar(lambda t: problem.ber(t * cap, (1.0 - t) * cap),
                                   bounds=(thetas[0], thetas[-1]), method="bounded",
                                   options={"xatol": THETA_TOL})
    t = float(res.x)
    p_s, p_r = t * cap, (1.0 - t) * cap
    return OpaResult(p_s, p_r, problem.ber(p_s, p_r), problem.energy(p_s, p_r),
                     float("nan"), True, False, t)


# --------------------------------------------------------------------------
# optimality checks
# --------------------------------------------------------------------------

def _grad(fn, p_s, p_r):
    hs = 1e-6 * max(p_s, 1e-6)
    hr = 1e-6 * max(p_r, 1e-6)
    gs = (fn(p_s + hs, p_r) - fn(p_s - hs, p_r)) / (2 * hs)
    gr = (fn(p_s, p_r + hr) - fn(p_s, p_r - hr)) / (2 * hr)
    return gs, gr


def kkt_check(candidate, problem: OpaProblem, return_multipliers: bool = False):
    """Scaled first-order optimality residual at ``candidate = (p_s, p_r)``.

    The BER multiplier comes from eliminating the power-cap multiplier
    between the two stationarity equations; the remaining stationarity
    mismatch is the cap multiplier. The residual adds |cap multiplier|
    when the cap is slack (complementary slackness), its negative part
    when the cap is active, and the negative part of the BER multiplier
    (the target binds as an upper limit on BER). Everything is divided by
    the energy-gradient magnitude so the residual is dimensionless.

    Raises :class:`InfeasibleError` when the candidate is off the BER
    contour by more than 1e-6 relative.
    """
    p_s, p_r = candidate
    ber = problem.ber(p_s, p_r)
    if abs(ber - problem.p_star) > 1e-6 * problem.p_star:
        raise InfeasibleError(f"candidate BER {ber:.6g} is off the target {problem.p_star:g}")
    if p_s + p_r > problem.p_maxt * (1.0 + 1e-9):
        raise InfeasibleError("candidate exceeds the power cap")
    de_s, de_r = _grad(problem.energy, p_s, p_r)
    db_s, db_r = _grad(problem.ber, p_s, p_r)
    lam_ber = (de_s - de_r) / (db_r - db_s)
    lam_cap = -(de_s + lam_ber * db_s)
    cap_active = p_s + p_r >= problem.p_maxt * (1.0 - 1e-6)
    scale = max(abs(de_s), abs(de_r))
    if cap_active:
        resid = max(0.0, -lam_cap)
    else:
        resid = abs(lam_cap)
    # a negative BER multiplier would mean extra BER could be traded for energy
    resid += max(0.0, -lam_ber) * max(abs(db_s), abs(db_r))
    resid /= scale
    if return_multipliers:
        return resid, {"ber": lam_ber, "power_cap": lam_cap}
    return resid


@dataclass(frozen=True)
class ConvexityReport:
    """Worst-case second-derivative margins of the mean consumed power.

    ``max_abs_rr``: largest scaled |d2P/dP_R^2| (expected 0).
    ``min_ss``: smallest scaled d2P/dP_S^2 (convexity needs >= 0).
    ``min_ss_minus_sr``: smallest scaled d2P/dP_S^2 - d2P/dP_S dP_R.
    Second derivatives are multiplied by ``P_S / (1 + alpha)``.
    """

    n_points: int
    max_abs_rr: float
    min_ss: float
    min_ss_minus_sr: float

    def margins_ok(self, tol: float = 1e-8) -> bool:
        return self.max_abs_rr <= tol and self.min_ss >= -tol and self.min_ss_minus_sr >= -tol


def convexity_probe(problem: OpaProblem, grid_size: int = 20,
                    center: tuple[float, float] | None = None) -> ConvexityReport:
    """Probe the second derivatives of the mean consumed power on a grid.

    The grid spans a factor of 4 either side of ``center`` (default: the
    optimum of ``problem``) in each power, log-spaced, keeping points that
    respect the power cap.
    """
    if center is None:
        opt = solve_opa(problem, check_kkt=False)
        center = (opt.p_s_opt, opt.p_r_opt)
    cs, cr = center
    amp = 1.0 + problem.profile.alpha(problem.mod)
    f = problem.mean_power
    worst_rr, worst_ss, worst_ord, n = 0.0, math.inf, math.inf, 0
    for ps in np.geomspace(cs / 4, cs * 4, grid_size):
        for pr in np.geomspace(cr / 4, cr * 4, grid_size):
            if ps + pr > problem.p_maxt:
                continue
            hs, hr = 1e-3 * ps, 1e-3 * pr
            f0 = f(ps, pr)
            d_ss = (f(ps + hs, pr) - 2 * f0 + f(ps - hs, pr)) / hs ** 2
            d_rr = (f(ps, pr + hr) - 2 * f0 + f(ps, pr - hr)) / hr ** 2
            d_sr = (f(ps + hs, pr + hr) - f(ps + hs, pr - hr)
                    - f(ps - hs, pr + hr) + f(ps - hs, pr - hr)) / (4 * hs * hr)
            k = ps / amp
            worst_rr = max(worst_rr, abs(d_rr) * k)
            worst_ss = min(worst_ss, d_ss * k)
            worst_ord = min(worst_ord, (d_ss - d_sr) * k)
            n += 1
    return ConvexityReport(n, worst_rr, worst_ss, worst_ord)


# --------------------------------------------------------------------------
# distance sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """Direct and cooperative minimum energies at one distance and correlation."""

    d_km: float
    rho: float
    p_s_dt: float
    energy_dt: float
    feasible_dt: bool
    opa: OpaResult
    ber_dt: float

    @property
    def energy_ct(self) -> float:
        return self.opa.energy_per_bit if self.opa.feasible else math.nan

    @property
    def savings(self) -> float:
        """Fractional energy saving of cooperation, ``1 - E_CT / E_DT``."""
        if not (self.feasible_dt and self.opa.feasible):
            return math.nan
        return 1.0 - self.energy_ct / self.energy_dt


def direct_row(problem: OpaProblem):
    """Uncapped direct-link optimum: (source power, energy per bit, within cap)."""
    dt = min_energy_direct(problem.p_star, problem.budget, problem.fading, problem.profile,
                           problem.mod, enforce_cap=False)
    return dt.p_s, dt.energy.e_total_per_bit, dt.feasible


def sweep_distance(template: OpaProblem, distances_km, f: float | None = None,
                   rhos=(0.0,), check_kkt: bool = False) -> list[SweepRow]:
    """Direct and cooperative minimum energy over a grid of distances."""
    d = np.asarray(distances_km, dtype=float)
    if d.size > 1 and np.any(np.diff(d) <= 0):
        raise DomainError("distances must be strictly increasing")
    rows = []
    for rho in rhos:
        for dk in d:
            prob = template.at_distance(float(dk), f, rho)
            p_s, e_dt, ok = direct_row(prob)
            opa = solve_opa(prob, check_kkt=check_kkt)
            rows.append(SweepRow(float(dk), float(rho), p_s, e_dt, ok, opa, prob.p_star))
    return rows


def crossover_distance(rows: list[SweepRow]) -> float:
    """First distance where cooperation beats direct transmission.

    Linear interpolation of ``E_CT - E_DT`` between grid points; NaN if
    the sign never changes. Direct energy is used uncapped here since the
    crossover can sit beyond direct reach only if cooperation never wins.
    """
    prev = None
    for r in rows:
        if not r.opa.feasible:
            break
        diff = r.energy_ct - r.energy_dt
        if diff < 0:
            if prev is None:
                return r.d_km
            d0, f0 = prev
            return d0 + (r.d_km - d0) * f0 / (f0 - diff)
        prev = (r.d_km, diff)
    return math.nan


def direct_max_reach(template: OpaProblem, lo_km: float = 0.01, hi_km: float = 5.0) -> float:
    """Largest distance at which direct transmission meets the target within the cap."""

    def excess(dk):
        p_s, _, _ = direct_row(template.at_distance(dk))
        return math.log(p_s / template.p_maxt)

    return optimize.brentq(excess, lo_km, hi_km, xtol=1e-7)


def ct_minus_dt(template: OpaProblem, d_km: float, rho: float | None = None) -> float:
    """Cooperative minus direct minimum energy per bit at one distance."""
    prob = template.at_distance(d_km, rho=rho)
    _, e_dt, _ = direct_row(prob)
    opa = solve_opa(prob, check_kkt=False)
    return (opa.energy_per_bit if opa.feasible else math.inf) - e_dt


def crossover_by_root(template: OpaProblem, lo_km: float, hi_km: float,
                      rho: float | None = None) -> float:
    """Crossover distance by root finding on the energy difference."""
    return optimize.brentq(lambda d: ct_minus_dt(template, d, rho), lo_km, hi_km, xtol=5e-4)
