"""Fractional sample-rate conversion.

A prototype lowpass at ``p`` times the input rate is split into polyphase
arms. :func:`polyphase_resample` handles rational ratios ``p/q``; for an
arbitrary stride :func:`fit_farrow` replaces each row of ``p`` consecutive
taps by a low-order polynomial in the fractional offset ``mu`` and
:func:`farrow_resample` evaluates those polynomials with Horner's rule at a
phase tracked by an exact integer accumulator.

Frequencies here are in cycles per sample of the interpolated (``p`` times
input) rate unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .dsp_core import ComplexSignal, as_array
from .errors import InfeasibleFilterError, MismatchedPrototypeError, RankError
from .numerology import is_power_of_two


def kaiser_beta(atten_db: float) -> float:
    if atten_db > 50:
        return 0.1102 * (atten_db - 8.7)
    if atten_db >= 21:
        return 0.5842 * (atten_db - 21) ** 0.4 + 0.07886 * (atten_db - 21)
    return 0.0


def kaiser_length(atten_db: float, transition: float) -> int:
    """Kaiser's length estimate for a transition width in cycles/sample."""
    return int(math.ceil((atten_db - 7.95) / (14.36 * transition))) + 1


@dataclass(frozen=True, eq=False)
class PrototypeFilter:
    """Linear-phase interpolation lowpass; taps sum to ``p`` (unit-gain arms)."""

    taps: np.ndarray
    p: int
    cutoff: float
    passband_edge: float
    stopband_edge: float
    stopband_atten: float

    @property
    def L(self) -> int:
        return self.taps.size

    @property
    def group_delay(self) -> float:
        """Delay in interpolated-rate samples."""
        return (self.L - 1) / 2.0

    def frequency_response(self, freqs) -> np.ndarray:
        n = np.arange(self.L)
        return np.exp(-2j * np.pi * np.outer(freqs, n)) @ self.taps

    def stopband_peak_db(self, points: int = 8192) -> float:
        """Largest stopband magnitude relative to DC gain, in dB."""
        f = np.linspace(self.stopband_edge, 0.5, points)
        H = np.abs(self.frequency_response(f))
        return 20.0 * math.log10(H.max() / abs(self.taps.sum()))

    def arm_dc_gains(self) -> np.ndarray:
        rows = -(-self.L // self.p)
        padded = np.zeros(rows * self.p)
        padded[: self.L] = self.taps
        return padded.reshape(rows, self.p).sum(axis=0)


def design_lowpass(
    L: int,
    p: int,
    stopband_atten: float = 60.0,
    passband_edge: float | None = None,
    stopband_edge: float | None = None,
) -> PrototypeFilter:
    """Kaiser-windowed sinc interpolation filter.

    Parameters
    ----------
    L : int
        Number of taps.
    p : int
        Interpolation factor.
    stopband_atten : float
        Required attenuation in dB beyond ``stopband_edge``.
    passband_edge : float, optional
        Highest frequency that must pass, default ``0.375 / p``.
    stopband_edge : float, optional
        Start of the stopband, default ``1/p - passband_edge`` (where the
        first image of a signal bandlimited to ``passband_edge`` begins).

    Raises
    ------
    InfeasibleFilterError
        When ``L`` is shorter than the Kaiser length estimate for the
        requested attenuation and transition width.
    """
    if p < 1:
        raise ValueError("interpolation factor must be at least 1")
    if L < 2 * p:
        raise InfeasibleFilterError(f"L={L} is shorter than 2p={2 * p}")
    if stopband_atten < 20:
        raise ValueError("stopband attenuation below 20 dB is not supported")
    if p == 1 and passband_edge is None and stopband_edge is None:
        # no images to reject: full-band cutoff, a centred delta for odd L
        n = np.arange(L) - (L - 1) / 2.0
        h = np.sinc(n) * np.kaiser(L, kaiser_beta(stopband_atten))
        h /= h.sum()
        h = 0.5 * (h + h[::-1])
        h.setflags(write=False)
        return PrototypeFilter(h, 1, 0.5, 0.5, 0.5, float(stopband_atten))
    pe = 0.375 / p if passband_edge is None else float(passband_edge)
    se = 1.0 / p - pe if stopband_edge is None else float(stopband_edge)
    if not 0 < pe < se <= 0.5:
        raise ValueError(f"need 0 < passband_edge < stopband_edge <= 0.5, got {pe}, {se}")
    need = kaiser_length(stopband_atten, se - pe)
    if L < need:
        raise InfeasibleFilterError(
            f"L={L} taps cannot reach {stopband_atten} dB over a {se - pe:.4g} transition (needs about {need})"
        )
    fc = 0.5 * (pe + se)
    n = np.arange(L) - (L - 1) / 2.0
    h = 2.0 * fc * np.sinc(2.0 * fc * n) * np.kaiser(L, kaiser_beta(stopband_atten))
    h *= p / h.sum()
    # enforce exact symmetry
    h = 0.5 * (h + h[::-1])
    h.setflags(write=False)
    return PrototypeFilter(h, p, fc, pe, se, float(stopband_atten))


@dataclass(frozen=True)
class RationalRatio:
    """Interpolate by ``p`` then step ``q = q_num / q_den`` interpolated samples."""

    p: int
    q_num: int
    q_den: int

    def __post_init__(self):
        if self.p < 1 or self.q_num < 1 or self.q_den < 1:
            raise ValueError("p, q_num and q_den must be positive")
        if math.gcd(self.q_num, self.q_den) != 1:
            raise ValueError("q_num/q_den must be reduced")

    @classmethod
    def from_q(cls, p: int, q) -> "RationalRatio":
        q = Fraction(q)
        return cls(int(p), q.numerator, q.denominator)

    @classmethod
    def for_sizes(cls, p: int, N_tilde: int, N: int) -> "RationalRatio":
        """Stride that maps ``N_tilde`` input samples onto ``N`` outputs."""
        return cls.from_q(p, Fraction(p * N_tilde, N))

    @property
    def q(self) -> Fraction:
        return Fraction(self.q_num, self.q_den)

    def output_length(self, n_in: int) -> int:
        return (n_in * self.p * self.q_den) // self.q_num


class PhaseAccumulator:
    """Exact output phase in units of ``1 / (p * q_den)`` input samples."""

    def __init__(self, ratio: RationalRatio, start: int = 0):
        self.ratio = ratio
        self.denom = ratio.p * ratio.q_den
        self.phase = int(start)

    def step(self, n: int = 1) -> None:
        self.phase += n * self.ratio.q_num

    @property
    def base(self) -> int:
        return self.phase // self.denom

    @property
    def mu(self) -> Fraction:
        return Fraction(self.phase % self.denom, self.denom)


@dataclass(frozen=True, eq=False)
class FarrowBank:
    """Polynomial rows replacing the polyphase arms of a prototype.

    ``coeffs[r, c]`` multiplies ``mu**c`` in row ``r``; row ``r`` stands for
    prototype taps ``r*p - lead_pad + i``, ``i = 0..p-1``. A partial row is
    filled with leading zeros (``lead_pad``) so the trailing fragment stays
    smooth.
    """

    coeffs: np.ndarray
    p: int
    alpha: int
    L: int
    lead_pad: int
    group_delay: float
    fit_residual: float
    passband_edge: float
    stopband_edge: float

    @property
    def rows(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, mu) -> np.ndarray:
        """Row polynomials at ``mu`` (Horner), shape ``(rows,)`` or ``(len(mu), rows)``."""
        mu = np.asarray(mu, dtype=np.float64)
        out = np.zeros(mu.shape + (self.rows,))
        for c in range(self.alpha, -1, -1):
            out = out * mu[..., None] + self.coeffs[:, c]
        return out

    def to_text(self) -> str:
        lines = [
            "# farrow-bank v1",
            f"p {self.p}",
            f"alpha {self.alpha}",
            f"L {self.L}",
            f"lead_pad {self.lead_pad}",
            f"group_delay {self.group_delay!r}",
            f"fit_residual {self.fit_residual!r}",
            f"passband_edge {self.passband_edge!r}",
            f"stopband_edge {self.stopband_edge!r}",
            f"rows {self.rows}",
        ]
        for row in self.coeffs:
            lines.append(" ".join(repr(float(c)) for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FarrowBank":
        meta = {}
        body = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, _, rest = line.partition(" ")
            if head in ("p", "alpha", "L", "lead_pad", "rows", "group_delay", "fit_residual",
                        "passband_edge", "stopband_edge"):
                meta[head] = rest.strip()
            else:
                body.append([float(v) for v in line.split()])
        coeffs = np.array(body, dtype=np.float64)
        if coeffs.shape != (int(meta["rows"]), int(meta["alpha"]) + 1):
            raise ValueError("coefficient block does not match the header")
        coeffs.setflags(write=False)
        return cls(
            coeffs=coeffs,
            p=int(meta["p"]),
            alpha=int(meta["alpha"]),
            L=int(meta["L"]),
            lead_pad=int(meta["lead_pad"]),
            group_delay=float(meta["group_delay"]),
            fit_residual=float(meta["fit_residual"]),
            passband_edge=float(meta["passband_edge"]),
            stopband_edge=float(meta["stopband_edge"]),
        )


def fit_farrow(proto: PrototypeFilter, alpha: int) -> FarrowBank:
    """Least-squares order-``alpha`` polynomial per row of ``p`` taps.

    Row ``r`` is fitted against ``mu = 0, 1/p, ..., (p-1)/p``. With
    ``alpha = p - 1`` the fit interpolates exactly.
    """
    p = proto.p
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if p < alpha + 1:
        raise RankError(f"{p} points per row cannot determine an order-{alpha} polynomial")
    rows = -(-proto.L // p)
    lead_pad = rows * p - proto.L
    padded = np.concatenate([np.zeros(lead_pad), proto.taps]).reshape(rows, p)
    mu = np.arange(p) / p
    V = np.vander(mu, alpha + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, padded.T, rcond=None)
    coeffs = np.ascontiguousarray(coeffs.T)
    residual = float(np.abs(coeffs @ V.T - padded).max())
    coeffs.setflags(write=False)
    return FarrowBank(
        coeffs=coeffs,
        p=p,
        alpha=alpha,
        L=proto.L,
        lead_pad=lead_pad,
        group_delay=proto.group_delay,
        fit_residual=residual,
        passband_edge=proto.passband_edge,
        stopband_edge=proto.stopband_edge,
    )


def _period(x) -> float:
    return x.sample_period if isinstance(x, ComplexSignal) else 1.0


def polyphase_resample(x, p: int, q: int, proto: PrototypeFilter, offset: int = 0, n_out: int | None = None) -> ComplexSignal:
    """Rational ``p/q`` conversion through the polyphase arms of ``proto``.

    Output ``m`` equals sample ``offset + m*q`` of the zero-stuffed, filtered
    signal at ``p`` times the input rate. ``n_out`` defaults to
    ``floor(len(x) * p / q)``.
    """
    if math.gcd(p, q) != 1:
        raise ValueError(f"p={p} and q={q} must be coprime")
    if proto.p != p:
        raise MismatchedPrototypeError(f"prototype designed for p={proto.p}, not {p}")
    if proto.passband_edge > 1.0 / (2 * max(p, q)) * (1 + 1e-12):
        raise MismatchedPrototypeError(
            f"prototype passband edge {proto.passband_edge:.6g} exceeds 1/(2 max(p, q)) = {1 / (2 * max(p, q)):.6g}"
        )
    if offset < 0:
        raise ValueError("offset must be non-negative")
    xv = as_array(x)
    if n_out is None:
        n_out = xv.size * p // q
    y = _kernels.polyphase(xv, proto.taps, int(p), int(q), int(offset), int(n_out))
    return ComplexSignal(y, _period(x) * q / p)


def farrow_resample(x, ratio: RationalRatio, bank: FarrowBank, offset=0, n_out: int | None = None) -> ComplexSignal:
    """Arbitrary-ratio conversion with Farrow polynomial rows.

    Output ``m`` sits at interpolated-rate position ``offset + m * q``, using
    the same convention as :func:`polyphase_resample`. ``offset`` may be a
    fraction whose denominator divides ``ratio.q_den``. The phase is kept as
    an integer count of ``1 / (p * q_den)`` input samples, so there is no
    drift however long the signal.
    """
    if bank.p != ratio.p:
        raise MismatchedPrototypeError(f"bank has p={bank.p}, ratio has p={ratio.p}")
    start = (Fraction(offset) + bank.lead_pad) * ratio.q_den
    if start.denominator != 1:
        raise ValueError("offset is not a multiple of 1/q_den interpolated samples")
    if start < 0:
        raise ValueError("offset must be non-negative")
    xv = as_array(x)
    if n_out is None:
        n_out = ratio.output_length(xv.size)
    y = _kernels.farrow(xv, bank.coeffs, int(start), int(ratio.q_num), int(ratio.p * ratio.q_den), int(n_out))
    return ComplexSignal(y, _period(x) * float(ratio.q) / ratio.p)


def multiplications_per_sample(L: int, p: int, alpha: int, N: int, N_tilde: int) -> float:
    """Approximate multiplies per input sample of the Farrow transmit path:
    ``(alpha + 1) * ceil(L / p) + 2 + N_tilde / (2 N) * log2(N_tilde)``.
    """
    if min(L, p, N, N_tilde) < 1 or alpha < 0:
        raise ValueError("sizes must be positive")
    if not is_power_of_two(N_tilde):
        raise ValueError("N_tilde must be a power of two")
    return (alpha + 1) * math.ceil(L / p) + 2 + N_tilde / (2.0 * N) * math.log2(N_tilde)


def direct_idft_cost(N: int) -> int:
    """Multiplies per sample of a direct N-point IDFT."""
    return int(N)


# Figure quoted in the literature for (L, p, alpha, N, N_tilde) = (231, 9, 4, 1543, 2048);
# the formula above gives 139.30 for the same inputs.
PUBLISHED_FARROW_MULTS = 146
