"""Transform primitives and elementary signal operations.

Transforms use the unnormalized convention in both directions::

    X[k] = sum_n x[n] exp(-2j pi n k / N)
    x[n] = sum_k X[k] exp(+2j pi n k / N)

so ``idft(dft(x)) == N * x``. Callers that need unit round-trip gain divide
by ``N`` themselves.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import AliasError, KernelLengthError, ShrinkError, TransformSizeError
from .numerology import is_power_of_two


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Finite run of complex samples taken every ``sample_period`` seconds."""

    samples: np.ndarray
    sample_period: float = 1.0

    def __post_init__(self):
        arr = _frozen(self.samples)
        if arr.size < 1:
            raise ValueError("a signal needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal samples must be finite")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)

    @property
    def duration(self) -> float:
        return len(self) * self.sample_period

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_period)


@dataclass(frozen=True, eq=False)
class SpectrumVector:
    bins: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.bins)
        if arr.size < 1:
            raise ValueError("a spectrum needs at least one bin")
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectrum bins must be finite")
        object.__setattr__(self, "bins", arr)

    def __len__(self):
        return self.bins.size

    def __array__(self, dtype=None, copy=None):
        return self.bins if dtype is None else self.bins.astype(dtype)


def as_array(x) -> np.ndarray:
    if isinstance(x, ComplexSignal):
        return x.samples
    if isinstance(x, SpectrumVector):
        return x.bins
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def _period(x, default=1.0) -> float:
    return x.sample_period if isinstance(x, ComplexSignal) else default


def dft(x) -> SpectrumVector:
    """Direct O(N^2) forward DFT of any length."""
    a = as_array(x)
    if a.size < 1:
        raise TransformSizeError("DFT of an empty sequence")
    return SpectrumVector(_kernels.dft_direct(a, -1))


def idft(X, sample_period: float = 1.0) -> ComplexSignal:
    """Direct O(N^2) inverse DFT of any length, without the 1/N factor."""
    a = as_array(X)
    if a.size < 1:
        raise TransformSizeError("IDFT of an empty sequence")
    return ComplexSignal(_kernels.dft_direct(a, +1), sample_period)


def _radix2(a: np.ndarray, sign: int) -> np.ndarray:
    n = a.size
    if not is_power_of_two(n):
        raise TransformSizeError(f"radix-2 transform needs a power-of-two length, got {n}")
    bits = n.bit_length() - 1
    # bit-reversal permutation
    rev = np.zeros(n, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    out = a[rev].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        k = np.arange(half)
        ang = 2.0 * np.pi * k / size
        w = np.cos(ang) + sign * 1j * np.sin(ang)
        blocks = out.reshape(n // size, size)
        top = blocks[:, :half].copy()
        bot = blocks[:, half:] * w
        blocks[:, :half] = top + bot
        blocks[:, half:] = top - bot
        size *= 2
    return out


def fft_pow2(x) -> SpectrumVector:
    """Iterative radix-2 decimation-in-time FFT; same values as :func:`dft`."""
    return SpectrumVector(_radix2(as_array(x), -1))


def ifft_pow2(X, sample_period: float = 1.0) -> ComplexSignal:
    """Radix-2 inverse of :func:`fft_pow2`, unnormalized like :func:`idft`."""
    return ComplexSignal(_radix2(as_array(X), +1), sample_period)


def circular_convolve(h, d) -> ComplexSignal:
    """``y[n] = sum_m h[m] d[(n - m) mod N]`` with ``h`` zero-extended to ``len(d)``."""
    hv = as_array(h)
    dv = as_array(d)
    if hv.size > dv.size:
        raise KernelLengthError(f"kernel length {hv.size} exceeds signal length {dv.size}")
    y = np.zeros(dv.size, dtype=np.complex128)
    for m in np.flatnonzero(hv):
        y += hv[m] * np.roll(dv, m)
    return ComplexSignal(y, _period(d))


def zero_pad_spectrum(D, N_tilde: int) -> SpectrumVector:
    """Append zero bins so the spectrum has ``N_tilde`` entries."""
    a = as_array(D)
    if N_tilde < a.size:
        raise ShrinkError(f"cannot pad {a.size} bins down to {N_tilde}")
    out = np.zeros(N_tilde, dtype=np.complex128)
    out[: a.size] = a
    return SpectrumVector(out)


def half_band_phasor(n: np.ndarray, ratio, direction: int) -> np.ndarray:
    """``exp(direction * 1j * pi * n * ratio)`` with exact phase reduction.

    A :class:`fractions.Fraction` ratio keeps the argument exact modulo 2.
    """
    n = np.asarray(n, dtype=np.int64)
    if isinstance(ratio, Fraction):
        num, den = ratio.numerator, ratio.denominator
        turns = ((n * num) % (2 * den)).astype(np.float64) / den
    else:
        turns = np.mod(n * float(ratio), 2.0)
    ang = direction * np.pi * turns
    return np.cos(ang) + 1j * np.sin(ang)


def half_band_shift(x, ratio, direction: int, start: int = 0) -> ComplexSignal:
    """Multiply sample ``n`` by ``exp(direction * j pi (n + start) ratio)``.

    With ``ratio = N / N_tilde`` and ``direction = -1`` a one-sided spectrum
    occupying ``[0, ratio)`` cycles/sample is moved to ``[-ratio/2, ratio/2)``.
    """
    if not 0 < ratio <= 1:
        raise ValueError("ratio must lie in (0, 1]")
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    a = as_array(x)
    n = np.arange(start, start + a.size)
    return ComplexSignal(a * half_band_phasor(n, ratio, direction), _period(x))


def _signed_bins(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.where(k < (n + 1) // 2, k, k - n)


def ideal_resample(x, out_len: int, centered: bool = False, tol: float = 1e-9) -> ComplexSignal:
    """Resample one period of a periodic bandlimited signal onto ``out_len`` points.

    The input spectrum is computed with the direct DFT, its occupied bins are
    moved to the same frequencies on the new grid and transformed back; a
    pure tone keeps its amplitude.

    Parameters
    ----------
    x : array-like or ComplexSignal
        One period of the signal.
    out_len : int
        Number of output samples over the same period.
    centered : bool
        If False, bin ``k`` is the frequency ``k`` cycles per period (one-sided,
        as produced by a zero-padded IFFT). If True, the upper half of the bins
        are negative frequencies.
    tol : float
        Bins with magnitude at most ``tol * max|X|`` count as empty.

    Raises
    ------
    AliasError
        If an occupied frequency does not fit on the output grid.
    """
    a = as_array(x)
    L = a.size
    if out_len < 1:
        raise ValueError("out_len must be positive")
    X = _kernels.dft_direct(a, -1)
    mag = np.abs(X)
    occupied = np.flatnonzero(mag > tol * mag.max()) if mag.max() > 0 else np.array([], dtype=int)
    freqs = _signed_bins(L)[occupied] if centered else occupied
    if centered:
        lo, hi = -(out_len // 2), (out_len - 1) // 2
    else:
        lo, hi = 0, out_len - 1
    if occupied.size and (freqs.min() < lo or freqs.max() > hi):
        raise AliasError(f"occupied bins do not fit on an {out_len}-point grid")
    Y = np.zeros(out_len, dtype=np.complex128)
    Y[freqs % out_len] = X[occupied]
    y = _kernels.dft_direct(Y, +1) / L
    period = _period(x) * L / out_len
    return ComplexSignal(y, period)
