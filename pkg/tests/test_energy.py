import pytest
from hypothesis import given, strategies as st

from dfrelay.energy import (EnergyProfile, _coop_breakdown, cooperation_gain, direct_power_for_target,
                            energy_coop, energy_direct, min_energy_direct)
from dfrelay.errors import DomainError, InfeasibleError
from dfrelay.link import FadingParams, Geometry, LinkBudget
from dfrelay.modulation import Modulation
from dfrelay.ser import ber_approx_constant, ser_direct_exact, ser_single_link

QPSK = Modulation()
PROFILE = EnergyProfile()
FADING = FadingParams.uniform(1.25)


def budget(d_km, f=0.5):
    return LinkBudget.from_geometry(Geometry(d_km, f))


class TestProfile:
    def test_defaults(self):
        p = PROFILE
        assert (p.p_ctx, p.p_crx, p.p_lo, p.eta, p.t_tr, p.packet_bits, p.bandwidth, p.p_maxt) == \
            (0.1, 0.15, 0.05, 0.35, 5e-6, 2000, 2e5, 1.0)

    def test_derived(self):
        assert PROFILE.t_on(QPSK) == pytest.approx(5e-3)
        assert PROFILE.alpha(QPSK) == pytest.approx(1 / 0.35 - 1)
        assert PROFILE.alpha(QPSK) == pytest.approx(1.857142857, rel=1e-9)

    @pytest.mark.parametrize("kw", [{"eta": 0.0}, {"p_ctx": -1}, {"packet_bits": 0}])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            EnergyProfile(**kw)


class TestDirectEnergy:
    def test_zero_power(self):
        e = energy_direct(0.0, PROFILE, QPSK)
        assert e.e_total_per_bit == pytest.approx(6.2525e-7, rel=1e-12)
        assert e.e_transmit == 0.0 and e.mode == "DT"

    def test_packet_length_scaling(self):
        long = EnergyProfile(packet_bits=4000)
        e1, e2 = energy_direct(0.1, PROFILE, QPSK), energy_direct(0.1, long, QPSK)
        assert e2.e_transmit == pytest.approx(e1.e_transmit, rel=1e-14)
        transient = PROFILE.transient_energy
        assert e1.e_circuit - e2.e_circuit == pytest.approx(transient / 2000 - transient / 4000)

    @given(p1=st.floats(0, 1), p2=st.floats(0, 1))
    def test_affine(self, p1, p2):
        slope = (1 + PROFILE.alpha(QPSK)) * PROFILE.t_on(QPSK) / PROFILE.packet_bits
        e1 = energy_direct(p1, PROFILE, QPSK).e_total_per_bit
        e2 = energy_direct(p2, PROFILE, QPSK).e_total_per_bit
        assert e2 - e1 == pytest.approx(slope * (p2 - p1), abs=1e-18)

    def test_negative_power(self):
        with pytest.raises(DomainError):
            energy_direct(-1e-3, PROFILE, QPSK)

    @given(bandwidth=st.floats(1e4, 1e7))
    def test_transmit_energy_falls_with_on_time_budget(self, bandwidth):
        # for a fixed power, a wider band shortens T_on and the transmit energy with it
        wide = EnergyProfile(bandwidth=bandwidth * 2)
        narrow = EnergyProfile(bandwidth=bandwidth)
        assert energy_direct(0.1, wide, QPSK).e_transmit < energy_direct(0.1, narrow, QPSK).e_transmit
        assert energy_direct(0.1, wide, QPSK).e_circuit < energy_direct(0.1, narrow, QPSK).e_circuit


class TestCoopEnergy:
    def test_relay_never_decodes(self):
        # with no forwarding the relay power and phase-two circuits drop out
        e = _coop_breakdown(0.1, 0.2, 0.0, PROFILE, QPSK)
        amp = 1 + PROFILE.alpha(QPSK)
        mean_power = PROFILE.p_ctx + 2 * PROFILE.p_crx + amp * 0.1
        expected = (mean_power * PROFILE.t_on(QPSK) + PROFILE.transient_energy) / PROFILE.packet_bits
        assert e.e_total_per_bit == pytest.approx(expected, rel=1e-14)

    def test_silent_source_relay_guesses(self):
        # at zero S-R SNR the relay detects correctly by chance, 1 time in M
        e = energy_coop(0.0, 0.2, budget(0.4), FADING, PROFILE, QPSK)
        assert e.relay_forward_prob == pytest.approx(0.25, rel=1e-12)

    def test_perfect_relay(self):
        bud = budget(0.01)
        p_s, p_r = 0.5, 0.3
        e = energy_coop(p_s, p_r, bud, FADING, PROFILE, QPSK)
        assert e.relay_forward_prob == pytest.approx(1.0, abs=1e-9)
        amp = 1 + PROFILE.alpha(QPSK)
        mean_power = 2 * PROFILE.p_ctx + 3 * PROFILE.p_crx + amp * (p_s + p_r)
        expected = (mean_power * PROFILE.t_on(QPSK) + PROFILE.transient_energy) / PROFILE.packet_bits
        assert e.e_total_per_bit == pytest.approx(expected, rel=1e-9)

    def test_table_row_energy(self):
        bud = budget(0.4)
        e = energy_coop(0.0706, 0.0703, bud, FADING, PROFILE, QPSK)
        sr, _ = ser_single_link(0.0706 * 0.5 / (bud.pl_sr * 1.25 * bud.n0), 1.25, QPSK)
        assert e.relay_forward_prob == pytest.approx(1 - sr, rel=1e-14)
        assert 1.5e-6 < e.e_total_per_bit < 4e-6

    @given(p_s=st.floats(1e-4, 0.5), p_r=st.floats(1e-4, 0.5), k=st.floats(1.01, 2))
    def test_increasing_in_powers(self, p_s, p_r, k):
        bud = budget(0.4)
        base = energy_coop(p_s, p_r, bud, FADING, PROFILE, QPSK).e_total_per_bit
        assert energy_coop(k * p_s, p_r, bud, FADING, PROFILE, QPSK).e_total_per_bit > base
        assert energy_coop(p_s, k * p_r, bud, FADING, PROFILE, QPSK).e_total_per_bit > base


class TestCooperationGain:
    def test_identity(self):
        assert cooperation_gain(1e-6, 1e-2, 1e-6, 1e-2) == 1.0

    def test_double(self):
        assert cooperation_gain(2e-6, 1e-3, 1e-6, 1e-3) == pytest.approx(2.0)

    def test_accepts_breakdowns(self):
        e = energy_direct(0.1, PROFILE, QPSK)
        assert cooperation_gain(e, 0.01, e, 0.01) == 1.0

    def test_rejects_certain_error(self):
        with pytest.raises(DomainError):
            cooperation_gain(1e-6, 1.0, 1e-6, 0.1)


class TestDirectOptimum:
    def test_target_at_constant_needs_no_power(self):
        c = ber_approx_constant(1.25, QPSK)
        assert direct_power_for_target(c, budget(0.3), FADING, QPSK) == 0.0

    def test_round_trip_through_exact_ber(self):
        bud = budget(0.39)
        opt = min_energy_direct(1e-2, bud, FADING, PROFILE, QPSK, enforce_cap=False)
        exact = ser_direct_exact(bud.with_powers(opt.p_s, 0.0), FADING, QPSK).ber
        assert exact == pytest.approx(1e-2, rel=0.1)
        assert opt.energy.e_total_per_bit == pytest.approx(opt.e_transmit + opt.e_circuit)

    def test_feasibility_edges(self):
        # reach edges at the higher target, checked with 10 m of slack
        min_energy_direct(1e-3, budget(0.20), FADING, PROFILE, QPSK)
        with pytest.raises(InfeasibleError) as info:
            min_energy_direct(1e-3, budget(0.26), FADING, PROFILE, QPSK)
        assert info.value.required > 1.0

    def test_unenforced_cap_flags(self):
        opt = min_energy_direct(1e-2, budget(0.6), FADING, PROFILE, QPSK, enforce_cap=False)
        assert not opt.feasible and opt.p_s > 1.0

    def test_psk_unsupported(self):
        with pytest.raises(DomainError):
            direct_power_for_target(1e-2, budget(0.3), FADING, Modulation.psk(8))
