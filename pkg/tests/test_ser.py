import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dfrelay.errors import DomainError, InfeasibleError
from dfrelay.integrals import quadrature_oracle
from dfrelay.link import FadingParams, Geometry, LinkBudget, snr_scalars
from dfrelay.modulation import Modulation
from dfrelay.ser import (ASYMPTOTIC, EXACT, QUADRATURE, SerResult, asymptotic_coefficients,
                         ber_approx_constant, ber_direct_approx, rho_from_targets,
                         ser_coop_asymptotic, ser_coop_exact, ser_coop_quadrature,
                         ser_coop_uncorrelated, ser_direct_exact, ser_direct_quadrature,
                         ser_single_link)

QPSK = Modulation()
PSK8 = Modulation.psk(8)
QAM16 = Modulation.qam(16)
HALF_INT = st.sampled_from([0.75, 1.25, 1.75, 2.25])
MODS = st.sampled_from([QPSK, QAM16, PSK8, Modulation.psk(4)])


def budget(p_s, p_r, d_km=0.6, f=0.5):
    return LinkBudget.from_geometry(Geometry(d_km, f), p_s, p_r)


def budget_from_snr(a, b, c, mod, m_sd=1.0, m_sr=1.0, m_rd=1.0):
    """Budget whose scaled SNRs equal (a, b, c) for unit mean powers."""
    n0, pl_sd = 1e-12, 1e12
    p_s = a * pl_sd * m_sd * n0 / mod.g
    pl_sr = p_s * mod.g / (b * m_sr * n0)
    p_r = 1.0
    pl_rd = p_r * mod.g / (c * m_rd * n0)
    return LinkBudget(pl_sd, pl_sr, pl_rd, n0, p_s, p_r)


class TestSerResult:
    def test_clamp_and_bits(self):
        r = SerResult.make(1.2, QPSK, EXACT)
        assert (r.ser, r.ber) == (1.0, 0.5)
        assert SerResult.make(-1e-18, QAM16, EXACT).ser == 0.0

    def test_invariant(self):
        with pytest.raises(DomainError):
            SerResult(1.5, 0.75, EXACT)


class TestSingleLink:
    @pytest.mark.parametrize("a, m, mod, expected", [
        (3.0, 1.25, QPSK, 0.080007477660167152),
        (20.0, 0.75, QAM16, 0.070936763222762361),
        (3.0, 1.25, PSK8, 0.086584502481485572),
    ])
    def test_reference(self, a, m, mod, expected):
        val, method = ser_single_link(a, m, mod)
        assert method == EXACT
        assert val == pytest.approx(expected, rel=1e-10)

    def test_rayleigh_qpsk_closed_form(self):
        # m = 1 Rayleigh QPSK: 2q - q^2 with q = (1 - sqrt(a/(1+a)))/2 ... per-axis form
        a = 4.0
        mu = math.sqrt(a / (1 + a))
        expected = 2 * 0.5 * (1 - mu) - (0.25 - mu / math.pi * math.atan(1 / mu))
        val, _ = ser_single_link(a, 1.0, QPSK)
        assert val == pytest.approx(expected, rel=1e-10)

    def test_zero_snr_is_guessing(self):
        for mod in (QPSK, QAM16, PSK8):
            assert ser_single_link(0.0, 1.25, mod)[0] == pytest.approx(1 - 1 / mod.order, rel=1e-12)

    def test_direct_exact_vs_quadrature(self):
        bud = budget(0.3, 0.0, d_km=0.3)
        fad = FadingParams(m_sd=1.0, m_sr=1.25, m_rd=1.25)
        assert ser_direct_exact(bud, fad, QPSK).ser == pytest.approx(
            ser_direct_quadrature(bud, fad, QPSK).ser, rel=1e-8)

    def test_vanishes_with_power(self):
        values = [ser_direct_exact(budget(p, 0.0), FadingParams(), QPSK).ser
                  for p in (1e2, 1e5, 1e8)]
        assert values[0] > values[1] > values[2] and values[2] < 1e-10


class TestCooperativeExact:
    def test_fig2_style_point(self):
        bud = budget(0.5, 0.5)
        fad = FadingParams.uniform(1.25, 0.5)
        exact = ser_coop_exact(bud, fad, QPSK)
        assert exact.method == EXACT
        assert exact.ser == pytest.approx(ser_coop_quadrature(bud, fad, QPSK).ser, rel=1e-8)

    def test_silent_relay_reduces_to_direct(self):
        bud = budget(0.3, 0.0)
        fad = FadingParams.uniform(1.25, 0.5)
        assert ser_coop_exact(bud, fad, QPSK).ser == pytest.approx(
            ser_direct_exact(bud, fad, QPSK).ser, rel=1e-12)

    def test_quadrature_fallback_for_other_shapes(self):
        res = ser_coop_exact(budget(0.5, 0.5), FadingParams.uniform(1.0, 0.3), QPSK)
        assert res.method == QUADRATURE

    @given(a=st.floats(0.05, 500), b=st.floats(0.05, 500), c=st.floats(0.05, 500),
           m=HALF_INT, rho=st.floats(0, 0.95), mod=MODS)
    def test_matches_quadrature(self, a, b, c, m, rho, mod):
        bud = budget_from_snr(a, b, c, mod, m, m, m)
        fad = FadingParams.uniform(m, rho)
        assert ser_coop_exact(bud, fad, mod).ser == pytest.approx(
            ser_coop_quadrature(bud, fad, mod).ser, rel=1e-8)

    @given(a=st.floats(0.05, 500), b=st.floats(0.05, 500), c=st.floats(0.05, 500),
           m=st.sampled_from([0.75, 1.25, 1.75]), mod=MODS)
    def test_uncorrelated_forms_agree(self, a, b, c, m, mod):
        bud = budget_from_snr(a, b, c, mod, m, m, m)
        fad = FadingParams.uniform(m, 0.0)
        assert ser_coop_uncorrelated(bud, fad, mod).ser == pytest.approx(
            ser_coop_exact(bud, fad, mod).ser, rel=1e-10)

    def test_uncorrelated_asymmetric_shapes(self):
        fad = FadingParams(m_sd=0.75, m_sr=1.25, m_rd=1.75)
        bud = budget_from_snr(4.0, 9.0, 6.0, QPSK, 0.75, 1.25, 1.75)
        s = snr_scalars(bud, fad, QPSK)
        sd = quadrature_oracle("F_QAM-kernel", {"M": 4, "kernel": "I", "a": s.a, "m": 0.75})
        sr = quadrature_oracle("F_QAM-kernel", {"M": 4, "kernel": "I", "a": s.b, "m": 1.25})
        mrc = quadrature_oracle("F_QAM-kernel", {"M": 4, "kernel": "K", "a": s.a, "b": s.c,
                                                 "m": 0.75, "n": 1.75})
        res = ser_coop_uncorrelated(bud, fad, QPSK)
        assert res.method == EXACT
        assert res.ser == pytest.approx(sd * sr + mrc * (1 - sr), rel=1e-8)

    def test_unbounded_source_power_removes_errors(self):
        assert ser_coop_uncorrelated(budget(1e6, 0.1), FadingParams(), QPSK).ser < 1e-8

    @given(p_s=st.floats(1e-3, 2), p_r=st.floats(1e-3, 2), k=st.floats(1.05, 3),
           rho=st.floats(0, 0.95), m=HALF_INT)
    def test_monotone_in_powers(self, p_s, p_r, k, rho, m):
        fad = FadingParams.uniform(m, rho)
        base = ser_coop_exact(budget(p_s, p_r), fad, QPSK).ser
        assert ser_coop_exact(budget(k * p_s, p_r), fad, QPSK).ser <= base * (1 + 1e-12)
        assert ser_coop_exact(budget(p_s, k * p_r), fad, QPSK).ser <= base * (1 + 1e-12)

    @given(p_s=st.floats(1e-3, 2), p_r=st.floats(1e-3, 2), r1=st.floats(0, 0.95),
           r2=st.floats(0, 0.95), m=HALF_INT)
    def test_correlation_hurts(self, p_s, p_r, r1, r2, m):
        lo, hi = sorted((r1, r2))
        bud = budget(p_s, p_r)
        s_lo = ser_coop_exact(bud, FadingParams.uniform(m, lo), QPSK).ser
        s_hi = ser_coop_exact(bud, FadingParams.uniform(m, hi), QPSK).ser
        assert s_hi >= s_lo * (1 - 1e-12)


class TestAsymptotic:
    @pytest.mark.parametrize("m", [0.75, 1.25])
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_converges_to_exact(self, m, rho):
        # the ratio approaches 1 from above; the gap shrinks like 1/SNR
        fad = FadingParams.uniform(m, rho)
        ratios = []
        for p in np.geomspace(10.0, 1e5, 9):
            ex = ser_coop_exact(budget(p, p), fad, QPSK).ser
            ratios.append(ser_coop_asymptotic(budget(p, p), fad, QPSK).ser / ex)
        assert all(r >= 1.0 - 1e-9 for r in ratios)
        assert all(r1 >= r2 - 1e-9 for r1, r2 in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(1.0, abs=2e-3)

    @pytest.mark.parametrize("m_c, m_sr", [(1.25, 1.25), (0.75, 1.75), (1.75, 0.75)])
    def test_diversity_order(self, m_c, m_sr):
        fad = FadingParams(m_sd=m_c, m_sr=m_sr, m_rd=m_c)
        p1, p2 = 1e4, 1e5
        s1 = ser_coop_asymptotic(budget(p1, p1), fad, QPSK).ser
        s2 = ser_coop_asymptotic(budget(p2, p2), fad, QPSK).ser
        slope = math.log10(s2 / s1)
        assert slope == pytest.approx(-min(m_c + m_sr, 2 * m_c), abs=0.02)

    def test_clamped_near_full_correlation(self):
        res = ser_coop_asymptotic(budget(0.05, 0.05), FadingParams.uniform(1.25, 0.999999), QPSK)
        assert res.ser == 1.0 and res.warning and res.method == ASYMPTOTIC

    def test_coefficients_positive(self):
        k = asymptotic_coefficients(1.25, 0.75, PSK8)
        assert min(k.direct, k.source_relay, k.dual_hop) > 0


class TestRhoInversion:
    @pytest.mark.parametrize("mod", [QPSK, PSK8])
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_round_trip(self, mod, rho):
        bud = budget(20.0, 20.0)
        fad = FadingParams.uniform(1.25, rho)
        target = ser_coop_asymptotic(bud, fad, mod).ser
        assert rho_from_targets(target, bud, fad, mod) == pytest.approx(rho, abs=1e-6)

    def test_below_uncorrelated_floor(self):
        bud = budget(20.0, 20.0)
        fad = FadingParams.uniform(1.25, 0.0)
        floor = ser_coop_asymptotic(bud, fad, QPSK).ser
        with pytest.raises(InfeasibleError):
            rho_from_targets(0.5 * floor, bud, fad, QPSK)


class TestBerApproximation:
    @pytest.mark.parametrize("m, mod, expected", [
        (0.75, QPSK, 0.24627428385043999), (1.25, QPSK, 0.21225623732989093),
        (2.25, QPSK, 0.17252334131857538), (1.25, QAM16, 0.15297779360217331),
    ])
    def test_constant(self, m, mod, expected):
        assert ber_approx_constant(m, mod) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("m", [0.75, 1.25, 1.75, 2.25])
    @pytest.mark.parametrize("a", [20.0, 100.0, 1e4])
    def test_close_to_exact(self, m, a):
        bud = budget_from_snr(a, 1.0, 1.0, QPSK, m, m, m)
        fad = FadingParams.uniform(m)
        exact = ser_direct_exact(bud, fad, QPSK).ber
        assert ber_direct_approx(bud, fad, QPSK) == pytest.approx(exact, rel=0.02)

    def test_psk_rejected(self):
        with pytest.raises(DomainError):
            ber_approx_constant(1.25, PSK8)
