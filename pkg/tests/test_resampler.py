import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from adaptive_cp.dsp_core import ideal_resample
from adaptive_cp.errors import InfeasibleFilterError, MismatchedPrototypeError, RankError
from adaptive_cp.resampler import (
    FarrowBank,
    PhaseAccumulator,
    RationalRatio,
    design_lowpass,
    direct_idft_cost,
    farrow_resample,
    fit_farrow,
    kaiser_length,
    multiplications_per_sample,
    polyphase_resample,
)
from adaptive_cp.transceiver import design_farrow_bank

from oracles import naive_resample


def _design(p, q, extra=24):
    m = max(p, q)
    if m == 1:
        return design_lowpass(extra + 1, 1)
    return design_lowpass(extra * m + 1, p, 60, passband_edge=0.3 / m, stopband_edge=0.7 / m)


class TestDesign:
    def test_paper_parameters_reach_60_db(self):
        proto = design_lowpass(231, 9, 60)
        assert proto.L == 231 and proto.p == 9
        assert proto.stopband_peak_db() <= -60.0
        np.testing.assert_array_equal(proto.taps, proto.taps[::-1])
        assert proto.taps.sum() == pytest.approx(9.0)
        np.testing.assert_allclose(proto.arm_dc_gains(), 1.0, atol=2e-3)

    def test_unit_factor_is_delta(self):
        proto = design_lowpass(31, 1)
        expect = np.zeros(31)
        expect[15] = 1
        np.testing.assert_allclose(proto.taps, expect, atol=1e-12)

    def test_infeasible(self):
        with pytest.raises(InfeasibleFilterError):
            design_lowpass(18, 9, 80)
        with pytest.raises(InfeasibleFilterError):
            design_lowpass(10, 9, 40)

    def test_bad_edges(self):
        with pytest.raises(ValueError):
            design_lowpass(101, 2, 60, passband_edge=0.3, stopband_edge=0.2)

    def test_kaiser_length_grows_with_attenuation(self):
        assert kaiser_length(80, 0.05) > kaiser_length(60, 0.05) > kaiser_length(40, 0.05)


class TestPolyphase:
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 64), st.integers(0, 5), st.integers(0, 2**31 - 1))
    def test_matches_naive(self, p, q, n, off, seed):
        assume(math.gcd(p, q) == 1 and n * p // q >= 1)
        proto = _design(p, q, 12)
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        n_out = n * p // q
        got = polyphase_resample(x, p, q, proto, off, n_out).samples
        ref = naive_resample(x, proto.taps, p, q, off, n_out)
        assert np.abs(got - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())

    def test_default_length(self):
        proto = _design(3, 4)
        y = polyphase_resample(np.ones(1536), 3, 4, proto)
        assert len(y) == 1152
        assert y.sample_period == pytest.approx(4 / 3)

    def test_unit_ratio_is_delayed_input(self):
        proto = design_lowpass(31, 1)
        x = np.random.default_rng(0).standard_normal(50) + 0j
        y = polyphase_resample(x, 1, 1, proto, offset=15, n_out=35).samples
        np.testing.assert_allclose(y, x[:35], atol=1e-12)

    def test_bandlimited_against_ideal(self):
        p, q, n = 2, 3, 300
        rng = np.random.default_rng(7)
        X = np.zeros(n, complex)
        k = np.r_[0:40, n - 40 : n]
        X[k] = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
        x = np.fft.ifft(X)
        proto = design_lowpass(241, p, 80, passband_edge=40 / n / q, stopband_edge=1 / q - 40 / n / q)
        gd = (proto.L - 1) // 2
        xx = np.tile(x, 3)
        # interpolated index gd + p*n lands on x[0] of the middle period
        y = polyphase_resample(xx, p, q, proto, offset=gd + p * n, n_out=n * p // q).samples
        ref = ideal_resample(x, n * p // q, centered=True).samples
        err = 10 * np.log10(np.sum(np.abs(y - ref) ** 2) / np.sum(np.abs(ref) ** 2))
        assert err <= -60

    def test_mismatched_prototype(self):
        with pytest.raises(MismatchedPrototypeError):
            polyphase_resample(np.ones(8), 2, 3, design_lowpass(101, 3, 60))
        with pytest.raises(MismatchedPrototypeError):
            polyphase_resample(np.ones(8), 2, 3, design_lowpass(101, 2, 60))

    def test_requires_coprime(self):
        with pytest.raises(ValueError):
            polyphase_resample(np.ones(8), 2, 4, _design(2, 4))


class TestFarrowFit:
    @pytest.mark.parametrize("p", [2, 3, 5, 9])
    def test_exact_when_alpha_is_p_minus_1(self, p):
        bank = fit_farrow(design_lowpass(20 * p + 1, p, 60), p - 1)
        assert bank.fit_residual <= 1e-10

    def test_constant_row(self):
        proto = design_lowpass(90, 9, 40)
        taps = np.full(90, 0.1)
        taps.setflags(write=False)
        from dataclasses import replace

        bank = fit_farrow(replace(proto, taps=taps), 3)
        np.testing.assert_allclose(bank.coeffs[:, 0], 0.1, atol=1e-12)
        np.testing.assert_allclose(bank.coeffs[:, 1:], 0, atol=1e-12)

    def test_rank_error(self):
        with pytest.raises(RankError):
            fit_farrow(design_lowpass(231, 9, 60), 9)

    def test_paper_bank_shape(self):
        bank = fit_farrow(design_lowpass(231, 9, 60), 4)
        assert bank.coeffs.shape == (26, 5)
        assert bank.lead_pad == 3

    def test_text_round_trip(self):
        bank = design_farrow_bank(1543, 2048)
        back = FarrowBank.from_text(bank.to_text())
        np.testing.assert_array_equal(back.coeffs, bank.coeffs)
        assert (back.p, back.alpha, back.L, back.lead_pad) == (bank.p, bank.alpha, bank.L, bank.lead_pad)
        assert back.passband_edge == bank.passband_edge

    def test_text_shape_check(self):
        text = design_farrow_bank(1543, 2048).to_text().replace("rows 26", "rows 25")
        with pytest.raises(ValueError):
            FarrowBank.from_text(text)


class TestFarrowResample:
    @pytest.mark.parametrize("p,q", [(4, 3), (9, 7), (5, 2), (3, 1)])
    def test_matches_polyphase_with_exact_fit(self, p, q):
        proto = design_lowpass(20 * p + 1, p, 60)
        bank = fit_farrow(proto, p - 1)
        x = np.random.default_rng(p * q).standard_normal(64) + 0j
        a = polyphase_resample(x, p, q, proto, 7, 40).samples
        b = farrow_resample(x, RationalRatio(p, q, 1), bank, 7, 40).samples
        assert np.abs(a - b).max() <= 1e-9

    def test_unit_ratio_identity(self):
        proto = design_lowpass(81, 4, 60)
        bank = fit_farrow(proto, 3)
        x = np.exp(2j * np.pi * 0.05 * np.arange(80))
        y = farrow_resample(x, RationalRatio(4, 4, 1), bank, offset=40, n_out=60).samples
        assert np.abs(y - x[:60]).max() < 1e-2

    def test_tone_amplitude(self):
        bank = design_farrow_bank(1543, 2048)
        r = RationalRatio.for_sizes(9, 2048, 1543)
        f = 0.2
        x = np.exp(2j * np.pi * f * np.arange(600))
        off = Fraction(round((Fraction(1800) + Fraction(bank.group_delay)) * r.q_den), r.q_den)
        y = farrow_resample(x, r, bank, offset=off, n_out=200).samples
        amp_db = 20 * np.log10(np.abs(y))
        assert np.abs(amp_db).max() <= 0.01
        start = (off - Fraction(bank.group_delay)) / 9
        t = np.array([float(start + m * r.q / 9) for m in range(200)])
        assert np.abs(y - np.exp(2j * np.pi * f * t)).max() < 2e-3

    def test_ratio_mismatch(self):
        bank = fit_farrow(design_lowpass(81, 4, 60), 2)
        with pytest.raises(MismatchedPrototypeError):
            farrow_resample(np.ones(10), RationalRatio(3, 2, 1), bank)

    def test_offset_granularity(self):
        bank = fit_farrow(design_lowpass(81, 4, 60), 2)
        with pytest.raises(ValueError):
            farrow_resample(np.ones(10), RationalRatio(4, 3, 2), bank, offset=Fraction(1, 3))

    def test_output_length(self):
        r = RationalRatio.for_sizes(9, 2048, 1543)
        assert r.output_length(2048) == 1543


class TestAccumulator:
    @given(st.integers(1, 16), st.integers(1, 4096), st.integers(1, 4096), st.integers(0, 1000), st.integers(1, 3000))
    def test_closed_form(self, p, num, den, start, n_in):
        ratio = RationalRatio.from_q(p, Fraction(num, den))
        acc = PhaseAccumulator(ratio, start)
        steps = ratio.output_length(n_in)
        acc.step(steps)
        assert acc.phase == start + steps * ratio.q_num
        pos = Fraction(start, ratio.p * ratio.q_den) + steps * ratio.q / ratio.p
        assert acc.base == math.floor(pos)
        assert acc.mu == pos - math.floor(pos)
        assert 0 <= acc.mu < 1

    def test_incremental_equals_bulk(self):
        ratio = RationalRatio.for_sizes(9, 2048, 1543)
        a, b = PhaseAccumulator(ratio, 5), PhaseAccumulator(ratio, 5)
        for _ in range(1543):
            a.step()
        b.step(1543)
        assert a.phase == b.phase

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            RationalRatio(9, 4, 2)
        with pytest.raises(ValueError):
            RationalRatio(0, 1, 1)


class TestCost:
    def test_published_configuration(self):
        assert multiplications_per_sample(231, 9, 4, 1543, 2048) == pytest.approx(139.30, abs=0.01)
        assert direct_idft_cost(1543) == 1543

    @given(st.integers(1, 32), st.integers(1, 1024))
    def test_reduction(self, p, k):
        N = 1 << (k % 12)
        assert multiplications_per_sample(p, p, 0, N, N) == pytest.approx(1 + 2 + 0.5 * math.log2(N))

    @given(st.integers(2, 16), st.integers(20, 400), st.integers(0, 10))
    def test_monotone(self, p, L, alpha):
        a = multiplications_per_sample(L, p, alpha, 1543, 2048)
        assert multiplications_per_sample(L, p, alpha + 1, 1543, 2048) > a
        assert multiplications_per_sample(L + p, p, alpha, 1543, 2048) > a

    def test_cheaper_than_direct(self):
        for L, p, alpha, N, Nt in [(231, 9, 4, 1543, 2048), (231, 9, 8, 1543, 2048), (1025, 16, 12, 100, 128)]:
            assert multiplications_per_sample(L, p, alpha, N, Nt) < direct_idft_cost(N) or N < 200

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            multiplications_per_sample(231, 9, 4, 1543, 1536)
