from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adaptive_cp.dsp_core import (
    ComplexSignal,
    SpectrumVector,
    circular_convolve,
    dft,
    fft_pow2,
    half_band_shift,
    ideal_resample,
    idft,
    ifft_pow2,
    zero_pad_spectrum,
)
from adaptive_cp.errors import AliasError, KernelLengthError, ShrinkError, TransformSizeError

from oracles import brute_circular_convolve, brute_dft

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_vectors(min_size=1, max_size=64):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(arrays(np.float64, n, elements=finite), arrays(np.float64, n, elements=finite)).map(
            lambda t: t[0] + 1j * t[1]
        )
    )


def rel_err(a, b):
    scale = max(np.abs(b).max(), 1e-300)
    return np.abs(np.asarray(a) - np.asarray(b)).max() / scale


class TestContainers:
    def test_signal_is_read_only(self):
        s = ComplexSignal([1, 2, 3], 1e-9)
        with pytest.raises(ValueError):
            s.samples[0] = 5
        assert s.samples.dtype == np.complex128
        assert len(s) == 3 and s.duration == pytest.approx(3e-9)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ComplexSignal([1, np.nan])

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            ComplexSignal([1], 0.0)

    def test_spectrum_vector(self):
        v = SpectrumVector([1, 2])
        assert v.bins.dtype == np.complex128


class TestDFT:
    def test_impulse(self):
        x = np.zeros(8)
        x[0] = 1
        np.testing.assert_allclose(dft(x).bins, np.ones(8))

    def test_single_tone(self):
        n = np.arange(5)
        X = dft(np.exp(2j * np.pi * n * 3 / 5)).bins
        expect = np.zeros(5, complex)
        expect[3] = 5
        assert np.abs(X - expect).max() < 1e-12

    def test_random_length_7_against_oracle(self):
        x = np.random.default_rng(1).standard_normal(7) + 1j * np.random.default_rng(2).standard_normal(7)
        assert rel_err(dft(x).bins, brute_dft(x)) < 1e-12

    def test_idft_all_ones(self):
        np.testing.assert_allclose(idft(np.ones(6)).samples, [6, 0, 0, 0, 0, 0], atol=1e-12)

    def test_idft_single_bin(self):
        D = np.zeros(8)
        D[3] = 1
        n = np.arange(8)
        assert np.abs(idft(D).samples - np.exp(2j * np.pi * n * 3 / 8)).max() < 1e-12

    def test_round_trip_scales_by_n(self):
        x = np.random.default_rng(3).standard_normal(9) + 0j
        assert rel_err(idft(dft(x)).samples, 9 * x) < 1e-12

    def test_idft_keeps_period(self):
        assert idft(np.ones(4), 2e-9).sample_period == 2e-9

    @given(complex_vectors(), complex_vectors(), finite, finite)
    def test_linearity(self, x, y, a, b):
        n = min(x.size, y.size)
        x, y = x[:n], y[:n]
        lhs = dft(a * x + b * y).bins
        rhs = a * dft(x).bins + b * dft(y).bins
        scale = max(np.abs(lhs).max(), np.abs(rhs).max(), 1.0)
        assert np.abs(lhs - rhs).max() <= 1e-12 * scale * n

    @given(complex_vectors())
    def test_parseval(self, x):
        X = dft(x).bins
        e = np.sum(np.abs(x) ** 2)
        assert np.sum(np.abs(X) ** 2) == pytest.approx(x.size * e, rel=1e-10, abs=1e-300)

    @given(complex_vectors(max_size=40))
    def test_matches_oracle(self, x):
        assert np.abs(dft(x).bins - brute_dft(x)).max() <= 1e-11 * max(1.0, np.abs(x).sum())


class TestRadix2:
    @pytest.mark.parametrize("k", range(0, 13))
    def test_matches_direct(self, k):
        rng = np.random.default_rng(k)
        n = 1 << k
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert rel_err(fft_pow2(x).bins, dft(x).bins) <= 1e-10
        assert rel_err(ifft_pow2(x).samples, idft(x).samples) <= 1e-10

    def test_length_one_identity(self):
        assert fft_pow2([3 + 1j]).bins[0] == 3 + 1j

    def test_rejects_non_power_of_two(self):
        with pytest.raises(TransformSizeError):
            fft_pow2(np.zeros(1536))
        with pytest.raises(TransformSizeError):
            ifft_pow2(np.zeros(12))


class TestCircularConvolution:
    def test_delta_identity(self):
        d = np.array([1, 2, 3, 4], complex)
        np.testing.assert_array_equal(circular_convolve([1], d).samples, d)

    def test_hand_wrap(self):
        np.testing.assert_array_equal(circular_convolve([1, 1], [1, 2, 3]).samples, [4, 3, 5])

    def test_frequency_domain_oracle(self):
        rng = np.random.default_rng(5)
        h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        d = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        ref = idft(dft(h).bins * dft(d).bins).samples / 16
        assert rel_err(circular_convolve(h, d).samples, ref) < 1e-10

    def test_h_longer_than_d(self):
        with pytest.raises(KernelLengthError):
            circular_convolve([1, 2, 3], [1, 2])

    @given(st.integers(1, 32).flatmap(lambda n: st.tuples(
        st.lists(st.integers(-32, 32), min_size=1, max_size=n),
        st.lists(st.integers(-32, 32), min_size=n, max_size=n),
    )))
    def test_integer_oracle_exact(self, hd):
        h, d = hd
        got = circular_convolve(np.array(h, complex), np.array(d, complex)).samples
        np.testing.assert_array_equal(got, np.array(brute_circular_convolve(h, d), complex))

    @given(st.integers(1, 32).flatmap(lambda n: st.tuples(
        st.lists(st.integers(-32, 32), min_size=n, max_size=n),
        st.lists(st.integers(-32, 32), min_size=n, max_size=n),
    )))
    def test_commutative(self, hd):
        h, d = (np.array(v, complex) for v in hd)
        np.testing.assert_array_equal(circular_convolve(h, d).samples, circular_convolve(d, h).samples)


class TestZeroPad:
    def test_append_layout(self):
        np.testing.assert_array_equal(zero_pad_spectrum([1, 2, 3], 5).bins, [1, 2, 3, 0, 0])

    def test_identity(self):
        np.testing.assert_array_equal(zero_pad_spectrum([1, 2], 2).bins, [1, 2])

    def test_preserves_bins_exactly(self):
        D = np.random.default_rng(0).standard_normal(1536) + 0.5j
        out = zero_pad_spectrum(D, 2048).bins
        np.testing.assert_array_equal(out[:1536], D)
        assert not out[1536:].any()

    def test_shrink(self):
        with pytest.raises(ShrinkError):
            zero_pad_spectrum([1, 2, 3], 2)


class TestHalfBandShift:
    def test_unit_ratio_alternates(self):
        x = np.ones(6, complex)
        np.testing.assert_allclose(half_band_shift(x, 1, -1).samples, [1, -1, 1, -1, 1, -1], atol=1e-15)

    @given(complex_vectors(), st.fractions(Fraction(1, 4096), Fraction(1)))
    def test_involution(self, x, ratio):
        back = half_band_shift(half_band_shift(x, ratio, -1), ratio, +1).samples
        assert np.abs(back - x).max() <= 1e-15 * max(1.0, np.abs(x).max()) * 4

    def test_centers_one_sided_band(self):
        N, Nt = 1543, 2048
        D = np.zeros(N, complex)
        D[[5, 700, 1500]] = 1
        d = ifft_pow2(zero_pad_spectrum(D, Nt)).samples
        # two periods: the shift of N/(2 Nt) cycles/sample is then a whole bin
        s = half_band_shift(np.tile(d, 2), Fraction(N, Nt), -1).samples
        X = np.abs(np.fft.fft(s)) ** 2
        f = np.fft.fftfreq(2 * Nt)
        outside = X[np.abs(f) > N / (2 * Nt) + 1e-12].sum()
        assert outside < 1e-6 * X.sum()


class TestIdealResample:
    def test_identity(self):
        x = np.random.default_rng(0).standard_normal(12) + 0j
        assert rel_err(ideal_resample(x, 12).samples, x) < 1e-12

    def test_tone_amplitude_preserved(self):
        n = np.arange(16)
        y = ideal_resample(np.exp(2j * np.pi * 3 * n / 16), 10).samples
        m = np.arange(10)
        assert np.abs(y - np.exp(2j * np.pi * 3 * m / 10)).max() < 1e-12

    def test_period_rescaled(self):
        y = ideal_resample(ComplexSignal(np.ones(8), 1e-9), 4)
        assert y.sample_period == pytest.approx(2e-9)

    def test_alias_error(self):
        n = np.arange(16)
        with pytest.raises(AliasError):
            ideal_resample(np.exp(2j * np.pi * 9 * n / 16), 8)

    def test_centered_bins(self):
        n = np.arange(16)
        y = ideal_resample(np.exp(-2j * np.pi * 2 * n / 16), 8, centered=True).samples
        m = np.arange(8)
        assert np.abs(y - np.exp(-2j * np.pi * 2 * m / 8)).max() < 1e-12

    @given(st.integers(0, 8).flatmap(lambda k: st.tuples(st.just(1 << k), st.integers(1, 1 << k))), st.integers(0, 2**32 - 1))
    def test_zero_padded_ifft_equals_direct_idft(self, sizes, seed):
        Nt, N = sizes
        rng = np.random.default_rng(seed)
        D = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        dt = ifft_pow2(zero_pad_spectrum(D, Nt))
        assert rel_err(ideal_resample(dt, N, tol=1e-10).samples, idft(D).samples) <= 1e-9
