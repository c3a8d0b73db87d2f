import math

import numpy as np
import pytest

from leolink.channel import (
    DopplerSpec,
    GainPartition,
    SrFading,
    StateProbMatrix,
    afd,
    equal_probability_partition,
    state_prob_matrix,
)
from leolink.geometry import PassGeometry, PassTimeline, build_timeline, distance_range, service_duration
from leolink.schemes import (
    DimensionMismatch,
    LinkBudget,
    PatConfig,
    RatConfig,
    SchemeReport,
    TrafficSpec,
    ZeroPower,
    pat_dor_integral,
    pat_dor_value,
    pat_first_threshold,
    pat_power_bounds,
    pat_report,
    rat_avg_power,
    rat_dor,
    rat_dor_integral,
    rat_ee_bounds,
    rat_first_threshold,
    rat_report,
    rat_snr_bounds,
    rat_throughput_bounds,
)

FADING = SrFading(m=10.1, b0=0.126, omega=0.825)
DOPPLER = DopplerSpec(f_scatter_max_hz=100.0, mean_aoa_rad=1.55, aoa_width=24.2)
SIGMA2 = 10.0 ** ((-66.0 - 30.0) / 10.0)
BUDGET = LinkBudget(bandwidth_hz=60e6, noise_power_w=SIGMA2, path_loss_exp=2.0)
GEO = PassGeometry(
    earth_radius_m=6371e3,
    orbit_height_m=500e3,
    coverage_radius_m=500e3,
    half_track_m=500e3,
    sat_speed_ms=7600.0,
)
D_MAX = distance_range(GEO, all_terminals=True)[1]
TRAFFIC = TrafficSpec(packet_bits=500e3, delay_threshold_s=1e-3)


def dbw(x: float) -> float:
    return 10.0 ** (x / 10.0)


@pytest.fixture(scope="module")
def timeline():
    return build_timeline(GEO, 1.0)


@pytest.fixture(scope="module")
def rat_setup(timeline):
    rat = RatConfig(tx_power_w=dbw(30.0), min_snr=1.0)
    mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
    part = equal_probability_partition(FADING, mu1, 8)
    probs = state_prob_matrix(FADING, part, timeline.n_slots)
    lam = afd(FADING, DOPPLER, mu1)
    return rat, part, probs, lam


@pytest.fixture(scope="module")
def pat_setup(timeline):
    pat = PatConfig(max_power_w=dbw(30.0), fixed_rate_bps=60e6)
    u1 = pat_first_threshold(BUDGET, pat, D_MAX)
    part = equal_probability_partition(FADING, u1, 8)
    probs = state_prob_matrix(FADING, part, timeline.n_slots)
    lam = afd(FADING, DOPPLER, u1)
    return pat, part, probs, lam


def single_slot_setup():
    t_s = service_duration(GEO)
    tl = build_timeline(GEO, t_s)
    rat = RatConfig(tx_power_w=dbw(30.0), min_snr=1.0)
    mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
    part = equal_probability_partition(FADING, mu1, 4)
    return tl, rat, part


class TestRatFirstThreshold:
    def test_unit_identity(self):
        rat = RatConfig(tx_power_w=SIGMA2 * 1.0 * 1000.0**2, min_snr=1.0)
        assert rat_first_threshold(BUDGET, rat, 1000.0) == pytest.approx(1.0, rel=1e-12)

    def test_quadrupled_power_halves_threshold(self):
        r1 = RatConfig(tx_power_w=100.0, min_snr=1.0)
        r4 = RatConfig(tx_power_w=400.0, min_snr=1.0)
        assert rat_first_threshold(BUDGET, r4, D_MAX) == pytest.approx(
            rat_first_threshold(BUDGET, r1, D_MAX) / 2.0, rel=1e-12
        )

    def test_reference_value(self):
        # sigma sqrt(gmin d^2 / P): sqrt(10^-9.6 * 707106.78^2 / 1000)
        rat = RatConfig(tx_power_w=dbw(30.0), min_snr=1.0)
        want = math.sqrt(SIGMA2 * 707106.78**2 / 1000.0)
        assert rat_first_threshold(BUDGET, rat, 707106.78) == pytest.approx(
            want, rel=1e-12
        )
        assert want == pytest.approx(0.3543928909, rel=1e-9)


class TestRatSnrBounds:
    def test_bottom_state_is_silent(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        for n in (1, timeline.n_slots):
            assert rat_snr_bounds(BUDGET, rat, part, timeline, 1, n) == (0.0, 0.0)

    def test_ordering(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        for k in range(1, part.n_states + 1):
            for n in (1, timeline.n_slots // 2, timeline.n_slots):
                lo, hi = rat_snr_bounds(BUDGET, rat, part, timeline, k, n)
                assert lo <= hi

    def test_single_slot_hand_evaluation(self):
        tl, rat, part = single_slot_setup()
        assert tl.n_slots == 1
        lo, hi = rat_snr_bounds(BUDGET, rat, part, tl, 2, 1)
        # slot max equals d_max here, so the state-2 lower SNR is exactly
        # gamma_min; the upper edge pairs mu_2^2 with the overhead range H.
        assert lo == pytest.approx(1.0, rel=1e-9)
        scale = rat.tx_power_w / SIGMA2
        want_hi = scale * float(part.thresholds[2]) ** 2 / GEO.orbit_height_m**2
        assert hi == pytest.approx(want_hi, rel=1e-12)

    def test_index_errors(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        with pytest.raises(IndexError):
            rat_snr_bounds(BUDGET, rat, part, timeline, 0, 1)
        with pytest.raises(IndexError):
            rat_snr_bounds(BUDGET, rat, part, timeline, part.n_states + 1, 1)
        with pytest.raises(IndexError):
            rat_snr_bounds(BUDGET, rat, part, timeline, 1, timeline.n_slots + 1)

    def test_unbounded_top_state_without_mean(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        bare = GainPartition(thresholds=part.thresholds)
        _, hi = rat_snr_bounds(BUDGET, rat, bare, timeline, bare.n_states, 1)
        assert math.isinf(hi)


class TestRatThroughput:
    def test_no_transmission_states(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        probs = StateProbMatrix(
            probs=np.vstack([
                np.ones(timeline.n_slots),
                np.zeros((part.n_states - 1, timeline.n_slots)),
            ])
        )
        assert rat_throughput_bounds(BUDGET, rat, part, timeline, probs) == (0.0, 0.0)

    def test_bounds_ordered(self, timeline, rat_setup):
        rat, part, probs, _ = rat_setup
        lo, hi = rat_throughput_bounds(BUDGET, rat, part, timeline, probs)
        assert 0.0 < lo <= hi < math.inf

    def test_dimension_mismatch(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        bad = StateProbMatrix(probs=np.full((part.n_states, 3), 1.0 / part.n_states))
        with pytest.raises(DimensionMismatch):
            rat_throughput_bounds(BUDGET, rat, part, timeline, bad)

    def test_monotone_in_power(self, timeline):
        prev_lo = prev_hi = 0.0
        for p_dbw in [24.0, 30.0, 36.0, 42.0]:
            rat = RatConfig(tx_power_w=dbw(p_dbw), min_snr=1.0)
            mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
            part = equal_probability_partition(FADING, mu1, 8)
            probs = state_prob_matrix(FADING, part, timeline.n_slots)
            lo, hi = rat_throughput_bounds(BUDGET, rat, part, timeline, probs)
            assert lo >= prev_lo and hi >= prev_hi
            prev_lo, prev_hi = lo, hi

    def test_monotone_in_height(self):
        rat = RatConfig(tx_power_w=dbw(30.0), min_snr=1.0)
        prev_lo = prev_hi = math.inf
        for h in [500e3, 700e3, 900e3, 1100e3]:
            geo = PassGeometry(
                earth_radius_m=6371e3, orbit_height_m=h, coverage_radius_m=500e3,
                half_track_m=500e3, sat_speed_ms=7600.0,
            )
            tl = build_timeline(geo, 1.0)
            d_max = distance_range(geo, all_terminals=True)[1]
            mu1 = rat_first_threshold(BUDGET, rat, d_max)
            part = equal_probability_partition(FADING, mu1, 8)
            probs = state_prob_matrix(FADING, part, tl.n_slots)
            lo, hi = rat_throughput_bounds(BUDGET, rat, part, tl, probs)
            assert lo <= prev_lo and hi <= prev_hi
            prev_lo, prev_hi = lo, hi


class TestRatPowerAndEe:
    def test_all_waiting(self, timeline):
        rat = RatConfig(tx_power_w=500.0, min_snr=1.0)
        probs = StateProbMatrix(
            probs=np.vstack([np.ones(timeline.n_slots), np.zeros((1, timeline.n_slots))])
        )
        assert rat_avg_power(rat, probs) == 0.0

    def test_always_transmitting(self, timeline):
        rat = RatConfig(tx_power_w=500.0, min_snr=1.0)
        probs = StateProbMatrix(
            probs=np.vstack([np.zeros((1, timeline.n_slots)), np.ones(timeline.n_slots)])
        )
        assert rat_avg_power(rat, probs) == pytest.approx(500.0, rel=1e-12)

    def test_mixed_column(self):
        rat = RatConfig(tx_power_w=500.0, min_snr=1.0)
        probs = StateProbMatrix(probs=np.array([[0.3], [0.7]]))
        assert rat_avg_power(rat, probs) == pytest.approx(0.7 * 500.0, rel=1e-12)

    def test_zero_power_guard(self, timeline, rat_setup):
        rat, part, _, _ = rat_setup
        silent = StateProbMatrix(
            probs=np.vstack([
                np.ones(timeline.n_slots),
                np.zeros((part.n_states - 1, timeline.n_slots)),
            ])
        )
        with pytest.raises(ZeroPower):
            rat_ee_bounds(BUDGET, rat, part, timeline, silent)

    def test_ee_recomposition(self, timeline, rat_setup):
        rat, part, probs, _ = rat_setup
        thr = rat_throughput_bounds(BUDGET, rat, part, timeline, probs)
        power = rat_avg_power(rat, probs)
        ee = rat_ee_bounds(BUDGET, rat, part, timeline, probs)
        assert ee[0] == pytest.approx(thr[0] / power, rel=1e-12)
        assert ee[1] == pytest.approx(thr[1] / power, rel=1e-12)


class TestRatDor:
    def test_zero_threshold(self, timeline, rat_setup):
        rat, part, probs, lam = rat_setup
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=0.0)
        assert rat_dor(BUDGET, rat, part, timeline, probs, traffic, lam) == 1.0

    def test_huge_threshold(self, timeline, rat_setup):
        rat, part, probs, lam = rat_setup
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=1e9)
        assert rat_dor(BUDGET, rat, part, timeline, probs, traffic, lam) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_monotone_in_delay_budget(self, timeline, rat_setup):
        rat, part, probs, lam = rat_setup
        prev = 1.0
        for t_th in [0.0, 2e-4, 5e-4, 1e-3, 5e-3, 9e-3, 2e-2, 1e-1]:
            traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=t_th)
            val = rat_dor(BUDGET, rat, part, timeline, probs, traffic, lam)
            assert val <= prev + 1e-15
            prev = val

    @pytest.mark.parametrize("p_dbw", [30.0, 40.0, 50.0])
    @pytest.mark.parametrize("t_th", [2e-4, 5e-4, 1e-3, 8e-3, 1.2e-2])
    def test_closed_form_equals_time_integral(self, timeline, p_dbw, t_th):
        rat = RatConfig(tx_power_w=dbw(p_dbw), min_snr=1.0)
        mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
        part = equal_probability_partition(FADING, mu1, 8)
        probs = state_prob_matrix(FADING, part, timeline.n_slots)
        lam = afd(FADING, DOPPLER, mu1)
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=t_th)
        closed = rat_dor(BUDGET, rat, part, timeline, probs, traffic, lam)
        integral = rat_dor_integral(BUDGET, rat, part, timeline, probs, traffic, lam)
        assert abs(closed - integral) < 1e-9

    def test_nontrivial_value_exercises_both_terms(self, timeline):
        # 50 dBW pushes top-state deliveries under 1 ms while a 12 ms budget
        # also arms the waiting-period branch
        rat = RatConfig(tx_power_w=dbw(50.0), min_snr=1.0)
        mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
        part = equal_probability_partition(FADING, mu1, 8)
        probs = state_prob_matrix(FADING, part, timeline.n_slots)
        lam = afd(FADING, DOPPLER, mu1)
        short = rat_dor(BUDGET, rat, part, timeline, probs,
                        TrafficSpec(500e3, 1e-3), lam)
        assert 0.0 < short < 1.0

    def test_rejects_bad_lambda(self, timeline, rat_setup):
        rat, part, probs, _ = rat_setup
        with pytest.raises(ValueError):
            rat_dor(BUDGET, rat, part, timeline, probs, TRAFFIC, 0.0)


class TestRatReport:
    def test_composition(self, timeline, rat_setup):
        rat, part, probs, lam = rat_setup
        rep = rat_report(BUDGET, rat, part, timeline, probs, TRAFFIC, lam)
        assert rep.throughput_lo_bps <= rep.throughput_hi_bps
        assert rep.avg_power_lo_w == rep.avg_power_hi_w
        assert rep.ee_lo_bpj <= rep.ee_hi_bpj
        assert 0.0 <= rep.dor <= 1.0
        assert rep.lam_s == lam

    def test_report_invariant_enforced(self):
        with pytest.raises(ValueError):
            SchemeReport(
                throughput_lo_bps=2.0, throughput_hi_bps=1.0,
                avg_power_lo_w=1.0, avg_power_hi_w=1.0,
                ee_lo_bpj=1.0, ee_hi_bpj=1.0, dor=0.5, lam_s=1.0,
            )


class TestPatFirstThreshold:
    def test_unit_identity(self):
        # fixed rate equal to bandwidth needs SNR 1; P_max = sigma^2 d^rho
        pat = PatConfig(max_power_w=SIGMA2 * 1000.0**2, fixed_rate_bps=60e6)
        assert pat_first_threshold(BUDGET, pat, 1000.0) == pytest.approx(1.0, rel=1e-12)

    def test_vanishes_with_large_cap(self):
        small = pat_first_threshold(
            BUDGET, PatConfig(max_power_w=1e15, fixed_rate_bps=60e6), D_MAX
        )
        assert small < 1e-4

    def test_reference_value(self):
        pat = PatConfig(max_power_w=dbw(30.0), fixed_rate_bps=60e6)
        want = math.sqrt(SIGMA2 * 1.0 * D_MAX**2 / dbw(30.0))
        assert pat_first_threshold(BUDGET, pat, D_MAX) == pytest.approx(want, rel=1e-12)


class TestPatPowerBounds:
    def test_bottom_state_is_silent(self, timeline, pat_setup):
        pat, part, _, _ = pat_setup
        assert pat_power_bounds(BUDGET, pat, part, timeline, 1, 1) == (0.0, 0.0)

    def test_ordering(self, timeline, pat_setup):
        pat, part, _, _ = pat_setup
        for k in range(2, part.n_states + 1):
            lo, hi = pat_power_bounds(BUDGET, pat, part, timeline, k, 1)
            assert 0.0 <= lo <= hi <= pat.max_power_w

    def test_cap_reached_exactly_at_worst_case(self):
        # single-slot pass: slot max distance equals the envelope d_max, so
        # substituting the first threshold gives the cap itself
        t_s = service_duration(GEO)
        tl = build_timeline(GEO, t_s)
        pat = PatConfig(max_power_w=dbw(30.0), fixed_rate_bps=60e6)
        u1 = pat_first_threshold(BUDGET, pat, D_MAX)
        part = equal_probability_partition(FADING, u1, 4)
        _, hi = pat_power_bounds(BUDGET, pat, part, tl, 2, 1)
        assert hi == pytest.approx(pat.max_power_w, rel=1e-12)

    def test_top_state_lower_bound_is_zero(self, timeline, pat_setup):
        pat, part, _, _ = pat_setup
        lo, hi = pat_power_bounds(BUDGET, pat, part, timeline, part.n_states, 1)
        assert lo == 0.0
        assert hi > 0.0

    def test_index_errors(self, timeline, pat_setup):
        pat, part, _, _ = pat_setup
        with pytest.raises(IndexError):
            pat_power_bounds(BUDGET, pat, part, timeline, 0, 1)
        with pytest.raises(IndexError):
            pat_power_bounds(BUDGET, pat, part, timeline, 2, 0)


class TestPatReport:
    def test_below_knee_is_certain_outage(self, timeline, pat_setup):
        pat, part, probs, lam = pat_setup
        # D / R_fix = 8.33 ms; a 5 ms budget cannot be met
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=5e-3)
        rep = pat_report(BUDGET, pat, part, timeline, probs, traffic, lam)
        assert rep.dor == 1.0

    def test_at_knee_equals_bottom_state_mass(self, timeline, pat_setup):
        pat, part, probs, lam = pat_setup
        knee = 500e3 / pat.fixed_rate_bps
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=knee)
        rep = pat_report(BUDGET, pat, part, timeline, probs, traffic, lam)
        assert rep.dor == pytest.approx(float(np.mean(probs.probs[0])), rel=1e-12)

    def test_above_knee_decays(self, timeline, pat_setup):
        pat, part, probs, lam = pat_setup
        knee = 500e3 / pat.fixed_rate_bps
        prev = 1.0
        for t_th in [knee, knee * 1.5, knee * 4.0, knee * 20.0]:
            rep = pat_report(
                BUDGET, pat, part, timeline, probs,
                TrafficSpec(500e3, t_th), lam,
            )
            assert rep.dor <= prev + 1e-15
            prev = rep.dor

    def test_closed_form_equals_time_integral(self, timeline, pat_setup):
        pat, part, probs, lam = pat_setup
        knee = 500e3 / pat.fixed_rate_bps
        for t_th in [0.0, knee * 0.7, knee, knee * 1.3, knee * 10.0]:
            traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=t_th)
            closed = pat_dor_value(probs, pat, traffic, lam)
            integral = pat_dor_integral(probs, pat, timeline, traffic, lam)
            assert abs(closed - integral) < 1e-9

    def test_throughput_single_valued(self, timeline, pat_setup):
        pat, part, probs, lam = pat_setup
        rep = pat_report(BUDGET, pat, part, timeline, probs, TRAFFIC, lam)
        want = pat.fixed_rate_bps * float(np.mean(1.0 - probs.probs[0]))
        assert rep.throughput_lo_bps == rep.throughput_hi_bps == pytest.approx(
            want, rel=1e-12
        )

    def test_zero_power_guard(self, timeline, pat_setup):
        pat, part, _, lam = pat_setup
        silent = StateProbMatrix(
            probs=np.vstack([
                np.ones(timeline.n_slots),
                np.zeros((part.n_states - 1, timeline.n_slots)),
            ])
        )
        with pytest.raises(ZeroPower):
            pat_report(BUDGET, pat, part, timeline, silent, TRAFFIC, lam)

    def test_deep_tail_rate_still_reports(self, timeline):
        # 600 Mbit/s at a 30 dBW cap: the first threshold sits ~150 orders of
        # magnitude into the tail; the report must still assemble, with the
        # outage dominated by the waiting state
        pat = PatConfig(max_power_w=dbw(30.0), fixed_rate_bps=600e6)
        u1 = pat_first_threshold(BUDGET, pat, D_MAX)
        part = equal_probability_partition(FADING, u1, 8)
        probs = state_prob_matrix(FADING, part, timeline.n_slots)
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=1e-3)
        rep = pat_report(BUDGET, pat, part, timeline, probs, traffic, lam_s=1e6)
        assert rep.dor == pytest.approx(1.0, abs=1e-6)
        assert rep.throughput_lo_bps < 1e-100


class TestMonotoneDorInPower:
    def test_rat_dor_nonincreasing_in_power(self, timeline):
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=1e-3)
        prev = 1.0 + 1e-12
        for p_dbw in [30.0, 36.0, 42.0, 48.0, 54.0]:
            rat = RatConfig(tx_power_w=dbw(p_dbw), min_snr=1.0)
            mu1 = rat_first_threshold(BUDGET, rat, D_MAX)
            part = equal_probability_partition(FADING, mu1, 8)
            probs = state_prob_matrix(FADING, part, timeline.n_slots)
            lam = afd(FADING, DOPPLER, mu1)
            val = rat_dor(BUDGET, rat, part, timeline, probs, traffic, lam)
            assert val <= prev + 1e-12
            prev = val

    def test_pat_dor_nonincreasing_in_cap(self, timeline):
        traffic = TrafficSpec(packet_bits=500e3, delay_threshold_s=9e-3)
        prev = 1.0 + 1e-12
        for p_dbw in [24.0, 30.0, 36.0, 42.0, 48.0]:
            pat = PatConfig(max_power_w=dbw(p_dbw), fixed_rate_bps=60e6)
            u1 = pat_first_threshold(BUDGET, pat, D_MAX)
            part = equal_probability_partition(FADING, u1, 8)
            probs = state_prob_matrix(FADING, part, timeline.n_slots)
            lam = afd(FADING, DOPPLER, u1)
            val = pat_dor_value(probs, pat, traffic, lam)
            assert val <= prev + 1e-12
            prev = val
