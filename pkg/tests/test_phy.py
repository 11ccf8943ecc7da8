import math

import numpy as np
import pytest

from wlansim import phy
from wlansim import rng as rngmod


TABLE = phy.load_mcs_table()


class TestMcsTable:
    def test_twelve_entries(self):
        assert len(TABLE) == 12

    def test_rate_oracle_closed_form(self):
        # independent recomputation: subcarriers x bits x code rate / symbol
        subc = {20: 234, 40: 468, 80: 980, 160: 1960}
        bits = [1, 2, 2, 4, 4, 6, 6, 6, 8, 8, 10, 10]
        rate = [0.5, 0.5, 0.75, 0.5, 0.75, 2 / 3, 0.75, 5 / 6, 0.75, 5 / 6, 0.75, 5 / 6]
        for bw in (20, 40, 80, 160):
            for nss in (1, 2, 8, 16):
                for i in range(12):
                    expect = subc[bw] * bits[i] * rate[i] * nss / 13.6
                    got = TABLE[i].data_rate_mbps(bw, nss)
                    assert got == pytest.approx(expect, rel=1e-3), (bw, nss, i)

    def test_spec_anchor_rates(self):
        assert TABLE[11].data_rate_mbps(80, 1) == pytest.approx(600.5, abs=0.1)
        assert TABLE[11].data_rate_mbps(160, 1) == pytest.approx(1201.0, abs=0.1)

    def test_strictly_increasing(self):
        rates = TABLE.rates_mbps(80, 1)
        assert np.all(np.diff(rates) > 0)

    def test_160_is_twice_80(self):
        r80 = TABLE.rates_mbps(80, 1)
        r160 = TABLE.rates_mbps(160, 1)
        np.testing.assert_allclose(r160 / r80, 2.0, rtol=1e-12)

    def test_nss_scaling_linear(self):
        r1 = TABLE.rates_mbps(80, 1)
        r8 = TABLE.rates_mbps(80, 8)
        np.testing.assert_allclose(r8 / r1, 8.0, rtol=1e-12)

    def test_loadable_from_file(self, tmp_path):
        path = tmp_path / "alt.csv"
        path.write_text(
            "index,modulation,bits_per_symbol,code_rate_num,code_rate_den,min_sinr_db\n"
            "0,BPSK,1,1,2,2.0\n1,QPSK,2,1,2,5.0\n")
        table = phy.load_mcs_table(str(path))
        assert len(table) == 2
        assert table[1].code_rate == 0.5

    def test_rejects_non_monotone(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "index,modulation,bits_per_symbol,code_rate_num,code_rate_den,min_sinr_db\n"
            "0,QPSK,2,3,4,2.0\n1,BPSK,1,1,2,5.0\n")
        with pytest.raises(phy.PhyError):
            phy.load_mcs_table(str(path))


class TestZeroForcing:
    def test_identity_channel(self):
        h = np.eye(2, dtype=complex)
        w = phy.zf_precoders(h)
        np.testing.assert_allclose(w, np.eye(2), atol=1e-12)
        off = h @ w - np.diag(np.diag(h @ w))
        assert np.max(np.abs(off)) < 1e-12

    def test_single_user_matched_beamforming(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        w = phy.zf_precoders(h[None, :])
        np.testing.assert_allclose(w[:, 0], h.conj() / np.linalg.norm(h), atol=1e-12)

    def test_orthogonality_vs_pinv_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            h = (rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))) / np.sqrt(2)
            w = phy.zf_precoders(h)
            # oracle: column-normalized pseudo-inverse
            w_oracle = np.linalg.pinv(h)
            w_oracle /= np.linalg.norm(w_oracle, axis=0, keepdims=True)
            np.testing.assert_allclose(np.abs(w), np.abs(w_oracle), atol=1e-8)
            cross = h @ w
            for i in range(4):
                for j in range(4):
                    if i != j:
                        assert abs(cross[i, j]) < 1e-9 * np.linalg.norm(h[i])

    def test_unit_norm_columns(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
        w = phy.zf_precoders(h)
        np.testing.assert_allclose(np.linalg.norm(w, axis=0), 1.0, atol=1e-12)

    def test_rank_deficient_raises(self):
        h = np.ones((2, 4), dtype=complex)
        with pytest.raises(phy.DegenerateSelectionError):
            phy.zf_precoders(h)

    def test_too_many_users_raises(self):
        h = np.ones((5, 4), dtype=complex)
        with pytest.raises(phy.DegenerateSelectionError):
            phy.zf_precoders(h)

    def test_effective_gain_equals_precoder_gain(self):
        rng = np.random.default_rng(3)
        h = (rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))) / np.sqrt(2)
        w = phy.zf_precoders(h)
        gains = phy.zf_effective_gains(h)
        diag = np.abs(np.diag(h @ w)) ** 2
        np.testing.assert_allclose(gains, diag, rtol=1e-9)


class TestSinr:
    def test_dl_single_user_full_power(self):
        h = np.array([[1.0 + 0j, 1.0, 1.0, 1.0]])
        g = phy.zf_effective_gains(h)         # ||h||^2 = 4
        sinr = phy.dl_sinr_db(g, 1.0, 20.0, 1, 0.0, 1.0)
        assert sinr == pytest.approx(10 * math.log10(100 * 4 / 1.0), abs=1e-9)

    def test_dl_power_split_3db(self):
        s1 = phy.dl_sinr_db(1.0, 1.0, 20.0, 1, 0.0, 1.0)
        s2 = phy.dl_sinr_db(1.0, 1.0, 20.0, 2, 0.0, 1.0)
        assert s1 - s2 == pytest.approx(10 * math.log10(2), abs=1e-9)

    def test_dl_interference_equals_noise(self):
        clean = phy.dl_sinr_db(1.0, 1.0, 20.0, 1, 0.0, 2.0)
        hit = phy.dl_sinr_db(1.0, 1.0, 20.0, 1, 2.0, 2.0)
        assert clean - hit == pytest.approx(3.01, abs=0.005)

    def test_ul_orthogonal_users_no_loss(self):
        h = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=complex)
        g = phy.zf_effective_gains(h)
        np.testing.assert_allclose(g, [2.0, 2.0], rtol=1e-12)
        sinr = phy.ul_sinr_db(g, 1.0, 15.0, 0.0, 1.0)
        np.testing.assert_allclose(sinr, 10 * math.log10(10 ** 1.5 * 2), atol=1e-9)

    def test_ul_colinear_collapse_closed_form(self):
        # correlation rho -> SINR loss 1/(1-rho^2) vs orthogonal, 2x2 oracle
        rho = 0.99
        h1 = np.array([1.0, 0, 0, 0], dtype=complex)
        h2 = rho * h1 + math.sqrt(1 - rho ** 2) * np.array([0, 1.0, 0, 0], dtype=complex)
        g = phy.zf_effective_gains(np.stack([h1, h2]))
        expect = 1.0 - rho ** 2
        assert g[0] == pytest.approx(expect, rel=0.01)
        loss = 10 * math.log10(1 / (1 - rho ** 2))
        assert loss == pytest.approx(17.0, abs=0.05)

    def test_ul_single_user_matched_filter(self):
        h = np.array([[1.0 + 1j, 2.0, 0.5, 0]], dtype=complex)
        g = phy.zf_effective_gains(h)
        assert g[0] == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-12)


class TestPpduDuration:
    def test_zero_payload_is_preamble_only(self):
        d = phy.ppdu_duration_us([0], [11], TABLE, 80)
        assert d == pytest.approx(44.0)

    def test_single_mpdu_mcs11_80(self):
        bits = (1500 + 40) * 8
        per_sym = 980 * 10 * (5 / 6)
        expect = 44.0 + math.ceil(bits / per_sym) * 13.6
        got = phy.ppdu_duration_us([1500], [11], TABLE, 80)
        assert got == pytest.approx(expect)

    def test_mu_aligned_to_slowest(self):
        fast = phy.ppdu_duration_us([1500], [11], TABLE, 80)
        slow = phy.ppdu_duration_us([1500], [0], TABLE, 80)
        both = phy.ppdu_duration_us([1500, 1500], [11, 0], TABLE, 80)
        assert both == pytest.approx(slow)
        assert slow > fast


class TestErrorModel:
    def test_waterfall_anchors(self):
        m = 20.0
        assert phy.packet_error_rate(m - 5.0, m) == 1.0
        assert phy.packet_error_rate(m - 1.0, m) == pytest.approx(1.0)
        assert phy.packet_error_rate(m, m) == pytest.approx(0.1)
        assert phy.packet_error_rate(m + 1.0, m) == pytest.approx(0.01)

    def test_deep_waterfall_always_succeeds(self):
        rng = rngmod.stream(0, 1)
        mcs = TABLE[5]
        n = 1000
        ok = sum(phy.decode_outcome(mcs.min_sinr_db + 20.0, mcs, 12000, rng)
                 for _ in range(n))
        assert ok == n
        assert phy.packet_error_rate(mcs.min_sinr_db + 20.0, mcs.min_sinr_db) <= 1e-6

    def test_below_threshold_always_fails(self):
        rng = rngmod.stream(0, 2)
        mcs = TABLE[5]
        assert not any(phy.decode_outcome(mcs.min_sinr_db - 5.0, mcs, 12000, rng)
                       for _ in range(100))

    def test_per_at_threshold_monte_carlo(self):
        rng = rngmod.stream(0, 3)
        mcs = TABLE[7]
        n = 10_000
        ok = sum(phy.decode_outcome(mcs.min_sinr_db, mcs, 12000, rng) for _ in range(n))
        per = 1 - ok / n
        assert per == pytest.approx(0.1, abs=0.02)

    def test_monotone_in_sinr(self):
        s = np.linspace(-10, 40, 300)
        per = [phy.packet_error_rate(x, 20.0) for x in s]
        assert np.all(np.diff(per) <= 0)

    def test_batch_matches_bernoulli_stats(self):
        rng = rngmod.stream(0, 4)
        n_ok = phy.decode_batch(100_000, 20.0, 20.0, rng)
        assert n_ok / 100_000 == pytest.approx(0.9, abs=0.01)
        assert phy.decode_batch(50, 0.0, 30.0, rng) == 0
        assert phy.decode_batch(50, 80.0, 2.0, rng) == 50


class TestMinstrel:
    def _state(self):
        return phy.MinstrelState(TABLE.rates_mbps(80, 1))

    def test_fresh_state_selects_lowest(self):
        st = self._state()
        mcs, probe = phy.minstrel_select(st, rngmod.stream(0, 5))
        assert mcs == 0
        assert probe

    def test_known_best_selected(self):
        st = self._state()
        st.prob[:] = 0.0
        st.attempts[:] = 5
        st.prob[7] = 0.9
        st.recompute_best()
        rng = rngmod.stream(0, 6)
        picks = [phy.minstrel_select(st, rng) for _ in range(300)]
        non_probe = [m for m, p in picks if not p]
        assert set(non_probe) == {7}
        probes = [m for m, p in picks if p]
        assert probes and all(m != 7 for m in probes)
        frac = len(probes) / len(picks)
        assert 0.04 < frac < 0.18

    def test_ewma_hundred_successes(self):
        st = self._state()
        for _ in range(100):
            phy.minstrel_update(st, 5, 1.0)
        assert st.prob[5] >= 1 - 0.75 ** 100
        assert st.prob[5] == pytest.approx(1.0)

    def test_converges_to_throughput_argmax(self):
        # synthetic 3-rate channel: success probs make the middle rate best
        rates = np.array([100.0, 200.0, 400.0])
        succ = {0: 1.0, 1: 0.9, 2: 0.2}          # est: 100, 180, 80
        st = phy.MinstrelState(rates)
        rng = rngmod.stream(0, 7)
        for _ in range(400):
            mcs, _ = phy.minstrel_select(st, rng)
            ok = 1.0 if rng.random() < succ[mcs] else 0.0
            phy.minstrel_update(st, mcs, ok)
        assert st.best == 1

    def test_ramp_reaches_top_quickly_on_clean_channel(self):
        st = self._state()
        rng = rngmod.stream(0, 8)
        steps = 0
        while np.any(st.attempts == 0) and steps < 40:
            mcs, _ = phy.minstrel_select(st, rng)
            phy.minstrel_update(st, mcs, 1.0)
            steps += 1
        assert steps <= 8
        assert st.best == len(TABLE) - 1

    def test_second_best_tracked(self):
        st = self._state()
        st.attempts[:] = 1
        st.prob[:] = 0.0
        st.prob[4] = 1.0
        st.prob[2] = 1.0
        st.recompute_best()
        assert st.best == 4
        assert st.second_best == 2


class TestSounding:
    POL_EXP = phy.SoundingPolicy("explicit", 8.0, 4.0, 4.0)
    POL_IMP = phy.SoundingPolicy("implicit", 8.0, 4.0, 4.0)

    def test_implicit_zero_stas(self):
        assert phy.sounding_overhead_us(self.POL_IMP, 0, 16, 160) == 0.0
        assert phy.sounding_overhead_us(self.POL_EXP, 0, 8, 80) == 0.0

    def test_explicit_exceeds_implicit(self):
        for n_sta in (1, 2, 8, 16, 32):
            for n_ss in (1, 2, 8, 16):
                for bw in (80, 160):
                    exp = phy.sounding_overhead_us(self.POL_EXP, n_sta, n_ss, bw)
                    imp = phy.sounding_overhead_us(self.POL_IMP, n_sta, n_ss, bw)
                    assert exp > imp, (n_sta, n_ss, bw)

    def test_explicit_doubles_with_streams(self):
        lo = phy.sounding_overhead_us(self.POL_EXP, 8, 8, 80)
        hi = phy.sounding_overhead_us(self.POL_EXP, 8, 16, 80)
        assert hi >= 2 * lo

    def test_implicit_independent_of_antennas(self):
        a = phy.sounding_overhead_us(self.POL_IMP, 8, 8, 80)
        b = phy.sounding_overhead_us(self.POL_IMP, 8, 16, 160)
        assert a == b

    def test_slow_feedback_scales(self):
        base = phy.sounding_overhead_us(self.POL_EXP, 2, 8, 80)
        slow = phy.sounding_overhead_us(self.POL_EXP, 2, 8, 80, feedback_scales=[4.0, 4.0])
        assert slow > base
