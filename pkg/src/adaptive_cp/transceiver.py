"""DFT-s-OFDM / OFDM transmit and receive chains.

Three transmit backends produce the same continuous-time data portion:

``direct``
    N-point IDFT clocked at ``T_s``.
``clock_change``
    The spectrum is zero-padded to a power of two ``N_tilde`` and sent
    through a radix-2 IFFT clocked at ``Ts_tilde = N * T_s / N_tilde``.
``farrow``
    The ``clock_change`` samples are shifted to a symmetric band, resampled
    to N samples per data portion with a Farrow bank and shifted back.

The receiver works on the ``T_s`` grid. For ``clock_change`` the ADC is
modeled by :func:`~adaptive_cp.dsp_core.ideal_resample`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .channel import ChannelModel, apply_channel, cir_as_signal, trial_rng
from .dsp_core import (
    ComplexSignal,
    as_array,
    dft,
    fft_pow2,
    half_band_phasor,
    ideal_resample,
    idft,
    ifft_pow2,
    zero_pad_spectrum,
)
from .errors import ConfigMismatchError, InfeasibleFilterError, LengthMismatchError, ZeroChannelBinError
from .numerology import ClockedPlan, NumerologyPlan, is_power_of_two
from .resampler import (
    FarrowBank,
    RationalRatio,
    design_lowpass,
    direct_idft_cost,
    farrow_resample,
    fit_farrow,
    multiplications_per_sample,
)

WAVEFORMS = ("dfts_ofdm", "ofdm")
BACKENDS = ("direct", "clock_change", "farrow")
EVM_FLOOR_DB = -150.0


class Constellation:
    """Gray-mapped square QAM with unit average energy."""

    def __init__(self, name: str = "qpsk"):
        name = name.lower()
        if name in ("qpsk", "4qam"):
            self.bits_per_axis = 1
        elif name in ("16qam", "qam16"):
            self.bits_per_axis = 2
        else:
            raise ValueError(f"unsupported constellation {name!r}")
        self.name = name
        m = 1 << self.bits_per_axis
        # gray code g -> amplitude level
        levels = np.arange(-(m - 1), m, 2, dtype=np.float64)
        gray = np.arange(m) ^ (np.arange(m) >> 1)
        self._level_of_code = np.empty(m)
        self._level_of_code[gray] = levels
        self._scale = math.sqrt(2.0 * np.mean(levels**2))
        self._levels = levels

    @property
    def bits_per_symbol(self) -> int:
        return 2 * self.bits_per_axis

    def _axis_code(self, bits: np.ndarray) -> np.ndarray:
        code = np.zeros(bits.shape[0], dtype=np.int64)
        for b in range(self.bits_per_axis):
            code = (code << 1) | bits[:, b]
        return code

    def modulate(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.bits_per_symbol)
        k = self.bits_per_axis
        re = self._level_of_code[self._axis_code(bits[:, :k])]
        im = self._level_of_code[self._axis_code(bits[:, k:])]
        return (re + 1j * im) / self._scale

    def _axis_bits(self, v: np.ndarray) -> np.ndarray:
        m = 1 << self.bits_per_axis
        idx = np.clip(np.round((v * self._scale + (m - 1)) / 2.0), 0, m - 1).astype(np.int64)
        code = idx ^ (idx >> 1)
        out = np.empty((v.size, self.bits_per_axis), dtype=np.int64)
        for b in range(self.bits_per_axis):
            out[:, b] = (code >> (self.bits_per_axis - 1 - b)) & 1
        return out

    def demodulate(self, symbols) -> np.ndarray:
        """Hard nearest-point decision, returned as a flat bit array."""
        s = np.asarray(symbols, dtype=np.complex128).reshape(-1)
        return np.hstack([self._axis_bits(s.real), self._axis_bits(s.imag)]).reshape(-1)

    def random_symbols(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.modulate(rng.integers(0, 2, size=n * self.bits_per_symbol))


@dataclass(frozen=True)
class SubcarrierMap:
    """Placement of M spread bins among N subcarriers.

    ``localized`` uses ``offset, offset+1, ...``; ``distributed`` uses
    ``offset + stride*i``. Indices wrap modulo N and must be distinct.
    """

    mode: str
    N: int
    M: int
    offset: int = 0
    stride: int = 1

    def __post_init__(self):
        if self.mode not in ("localized", "distributed"):
            raise ValueError(f"unknown mapping mode {self.mode!r}")
        if not 1 <= self.M <= self.N:
            raise ConfigMismatchError(f"map needs 1 <= M <= N, got M={self.M}, N={self.N}")
        idx = self.indices
        if np.unique(idx).size != idx.size:
            raise ConfigMismatchError("subcarrier map is not injective")

    @property
    def indices(self) -> np.ndarray:
        step = 1 if self.mode == "localized" else self.stride
        return (self.offset + step * np.arange(self.M)) % self.N

    def map(self, U) -> np.ndarray:
        u = as_array(U)
        if u.size != self.M:
            raise LengthMismatchError(f"expected {self.M} bins, got {u.size}")
        D = np.zeros(self.N, dtype=np.complex128)
        D[self.indices] = u
        return D

    def demap(self, Y) -> np.ndarray:
        y = as_array(Y)
        if y.size != self.N:
            raise LengthMismatchError(f"expected {self.N} bins, got {y.size}")
        return y[self.indices]


@dataclass(frozen=True)
class TxConfig:
    waveform: str
    backend: str
    plan: NumerologyPlan
    map: SubcarrierMap
    clocked: ClockedPlan | None = None
    farrow: FarrowBank | None = None
    constellation: str = "qpsk"
    equalizer: str = "zf"
    noise_var: float = 0.0

    def __post_init__(self):
        if self.waveform not in WAVEFORMS:
            raise ConfigMismatchError(f"unknown waveform {self.waveform!r}")
        if self.backend not in BACKENDS:
            raise ConfigMismatchError(f"unknown backend {self.backend!r}")
        if self.equalizer not in ("zf", "mmse"):
            raise ConfigMismatchError(f"unknown equalizer {self.equalizer!r}")
        plan = self.plan
        if self.map.N != plan.N or self.map.M != plan.M:
            raise ConfigMismatchError("subcarrier map does not match the plan's N and M")
        if self.waveform == "ofdm" and plan.M != plan.N:
            raise ConfigMismatchError("OFDM mode requires M == N")
        needs_clock = self.backend in ("clock_change", "farrow")
        if needs_clock != (self.clocked is not None):
            raise ConfigMismatchError(
                f"backend {self.backend!r} {'requires' if needs_clock else 'does not take'} a clocked plan"
            )
        if (self.backend == "farrow") != (self.farrow is not None):
            raise ConfigMismatchError(
                f"backend {self.backend!r} {'requires' if self.backend == 'farrow' else 'does not take'} a Farrow bank"
            )
        if self.clocked is not None and self.clocked.base != plan:
            raise ConfigMismatchError("clocked plan is built on a different numerology")
        if self.farrow is not None and plan.N != self.clocked.N_tilde:
            edge = plan.N / (2.0 * self.clocked.N_tilde * self.farrow.p)
            if edge > self.farrow.passband_edge * (1 + 1e-9):
                raise ConfigMismatchError(
                    f"Farrow bank passes up to {self.farrow.passband_edge:.6g}, signal needs {edge:.6g}"
                )

    @property
    def K_emitted(self) -> int:
        return self.clocked.K_tilde if self.backend == "clock_change" else self.plan.K

    @property
    def ratio(self) -> RationalRatio:
        return RationalRatio.for_sizes(self.farrow.p, self.clocked.N_tilde, self.plan.N)


def design_farrow_bank(N: int, N_tilde: int, L: int = 231, p: int = 9, alpha: int = 4, stopband_atten: float = 60.0) -> FarrowBank:
    """Prototype and polynomial fit for resampling an ``N/N_tilde`` occupied band.

    When ``N == N_tilde`` the transmit path never resamples; the bank then
    gets the default band edges.
    """
    if N == N_tilde:
        proto = design_lowpass(L, p, stopband_atten)
    else:
        edge = N / (2.0 * N_tilde * p)
        proto = design_lowpass(L, p, stopband_atten, passband_edge=edge, stopband_edge=1.0 / p - edge)
    return fit_farrow(proto, alpha)


def make_tx_config(
    plan: NumerologyPlan,
    waveform: str = "dfts_ofdm",
    backend: str = "direct",
    mapping: SubcarrierMap | None = None,
    N_tilde: int | None = None,
    farrow: FarrowBank | None = None,
    **kw,
) -> TxConfig:
    """Fill in the clocked plan, Farrow bank and a localized map when omitted.

    For ``farrow`` without an explicit ``N_tilde`` or bank, ``N_tilde`` is
    doubled until the default bank leaves room for a transition band.
    """
    if mapping is None:
        mapping = SubcarrierMap("localized", plan.N, plan.M)
    clocked = ClockedPlan.from_plan(plan, N_tilde) if backend in ("clock_change", "farrow") else None
    if backend == "farrow" and farrow is None:
        while True:
            try:
                farrow = design_farrow_bank(plan.N, clocked.N_tilde)
                break
            except InfeasibleFilterError:
                # band too close to N_tilde/2 for the default bank; oversample further
                if N_tilde is not None:
                    raise
                clocked = ClockedPlan.from_plan(plan, 2 * clocked.N_tilde)
    return TxConfig(waveform, backend, plan, mapping, clocked, farrow, **kw)


def spread_and_map(u, cfg: TxConfig) -> np.ndarray:
    """QAM block -> N-bin subcarrier vector ``D``."""
    u = as_array(u)
    if u.size != cfg.plan.M:
        raise ConfigMismatchError(f"block has {u.size} symbols, config expects M={cfg.plan.M}")
    U = as_array(dft(u)) if cfg.waveform == "dfts_ofdm" else u
    return cfg.map.map(U)


def farrow_data_portion(d_tilde, N: int, ratio: RationalRatio, bank: FarrowBank) -> np.ndarray:
    """Resample one ``N_tilde``-sample data portion to N samples.

    The periodic input is extended on both sides so the filter sees the
    cyclic continuation, shifted to a symmetric band, resampled and shifted
    back by ``(-1)**m`` at the output rate.
    """
    dt = as_array(d_tilde)
    Nt = dt.size
    guard = bank.rows + 2
    n = np.arange(-guard, Nt + guard)
    x = dt[n % Nt] * half_band_phasor(n, Fraction(N, Nt), -1)
    offset = Fraction(guard * bank.p) + Fraction(bank.group_delay)
    offset = Fraction(round(offset * ratio.q_den), ratio.q_den)
    y = as_array(farrow_resample(x, ratio, bank, offset=offset, n_out=N))
    sign = 1.0 - 2.0 * (np.arange(N) & 1)
    return y * sign


def data_portion(D, cfg: TxConfig) -> ComplexSignal:
    plan = cfg.plan
    if cfg.backend == "direct":
        return idft(D, plan.T_s)
    ck = cfg.clocked
    dt = ifft_pow2(zero_pad_spectrum(D, ck.N_tilde), ck.Ts_tilde)
    if cfg.backend == "clock_change":
        return dt
    if ck.N_tilde == plan.N:
        return ComplexSignal(dt.samples, plan.T_s)
    return ComplexSignal(farrow_data_portion(dt, plan.N, cfg.ratio, cfg.farrow), plan.T_s)


def add_cp(d: ComplexSignal, K: int) -> ComplexSignal:
    s = d.samples
    if K > s.size:
        raise ConfigMismatchError(f"CP of {K} samples is longer than the data portion ({s.size})")
    return d.with_samples(np.concatenate([s[s.size - K :], s]))


def tx_chain(u, cfg: TxConfig) -> ComplexSignal:
    """One symbol: CP followed by the data portion, at the backend's sample period."""
    d = data_portion(spread_and_map(u, cfg), cfg)
    return add_cp(d, cfg.K_emitted)


def to_sample_grid(x: ComplexSignal, cfg: TxConfig) -> ComplexSignal:
    """Bring a transmitted symbol onto the ``T_s`` grid (DAC/ADC model).

    Only ``clock_change`` symbols need conversion; the data portion is
    resampled ideally and a K-sample CP is formed from it.
    """
    if cfg.backend != "clock_change" or math.isclose(x.sample_period, cfg.plan.T_s, rel_tol=1e-12):
        return x
    ck = cfg.clocked
    s = x.samples
    if s.size < ck.K_tilde + ck.N_tilde:
        raise LengthMismatchError("clock_change symbol is shorter than K_tilde + N_tilde")
    d = ideal_resample(ComplexSignal(s[ck.K_tilde : ck.K_tilde + ck.N_tilde], ck.Ts_tilde), cfg.plan.N, tol=1e-10)
    return add_cp(ComplexSignal(d.samples, cfg.plan.T_s), cfg.plan.K)


def transmit(u, cfg: TxConfig) -> ComplexSignal:
    """:func:`tx_chain` followed by :func:`to_sample_grid`."""
    return to_sample_grid(tx_chain(u, cfg), cfg)


def _transform(a: np.ndarray) -> np.ndarray:
    return as_array(fft_pow2(a) if is_power_of_two(a.size) else dft(a))


class RxResult(NamedTuple):
    u_hat: np.ndarray
    channel_bins: np.ndarray
    min_channel_gain: float


def rx_chain(y, cfg: TxConfig, h) -> RxResult:
    """Strip CP, transform, demap, equalize per bin and despread.

    ``y`` starts at the first CP sample. ``h`` is the dense CIR on the
    ``T_s`` grid. Noiseless, with the CIR inside the CP, ``u_hat == u``.
    """
    plan = cfg.plan
    N, K, M = plan.N, plan.K, plan.M
    if isinstance(y, ComplexSignal):
        y = to_sample_grid(y, cfg)
    yv = as_array(y)
    if yv.size < N + K:
        raise LengthMismatchError(f"received {yv.size} samples, need at least N + K = {N + K}")
    hv = as_array(h)
    if hv.size > N:
        raise LengthMismatchError("CIR is longer than the data portion")
    H = np.zeros(N, dtype=np.complex128)
    H[: hv.size] = hv
    Y = cfg.map.demap(_transform(yv[K : K + N]))
    Hb = cfg.map.demap(_transform(H))
    gain = float(np.abs(Hb).min())
    if cfg.equalizer == "zf":
        if gain < 1e-12:
            raise ZeroChannelBinError(f"channel response {gain:.3g} on an occupied bin")
        D = Y / (N * Hb)
    else:
        D = np.conj(Hb) * Y / (N * (np.abs(Hb) ** 2 + cfg.noise_var))
    u_hat = as_array(idft(D)) / M if cfg.waveform == "dfts_ofdm" else D
    return RxResult(u_hat, Hb, gain)


@dataclass(frozen=True)
class LinkMetrics:
    evm_db: float
    ber: float
    rel_mse_db: float
    overhead: float


def _ratio_db(err: float, ref: float) -> float:
    if ref <= 0:
        raise ValueError("reference has zero energy")
    if err <= 0:
        return EVM_FLOOR_DB
    return max(EVM_FLOOR_DB, 10.0 * math.log10(err / ref))


def error_db(ref, test) -> float:
    """``10 log10(sum|test - ref|^2 / sum|ref|^2)``, floored at -150 dB."""
    r = as_array(ref)
    t = as_array(test)
    if r.size != t.size:
        raise LengthMismatchError(f"length mismatch: {r.size} vs {t.size}")
    return _ratio_db(float(np.sum(np.abs(t - r) ** 2)), float(np.sum(np.abs(r) ** 2)))


def measure(u, u_hat, x_ref=None, x_test=None, constellation: str | Constellation = "qpsk", overhead: float = 0.0) -> LinkMetrics:
    """EVM and BER of a recovered block; optional relative MSE of two signals."""
    c = constellation if isinstance(constellation, Constellation) else Constellation(constellation)
    evm = error_db(u, u_hat)
    bits = c.demodulate(as_array(u))
    bits_hat = c.demodulate(as_array(u_hat))
    ber = float(np.mean(bits != bits_hat))
    rel = error_db(x_ref, x_test) if x_ref is not None and x_test is not None else float("nan")
    return LinkMetrics(evm, ber, rel, float(overhead))


def backend_cost(cfg: TxConfig) -> float:
    """Multiplies per sample of the transmit transform path."""
    N = cfg.plan.N
    if cfg.backend == "direct":
        return float(direct_idft_cost(N))
    Nt = cfg.clocked.N_tilde
    if cfg.backend == "clock_change":
        return Nt / (2.0 * N) * math.log2(Nt) if Nt > 1 else 0.0
    return multiplications_per_sample(cfg.farrow.L, cfg.farrow.p, cfg.farrow.alpha, N, Nt)


RECORD_FIELDS = ("trial", "backend", "waveform", "N", "K", "evm_db", "ber", "rel_mse_db", "mults_per_sample")


def simulate_link(cfg: TxConfig, channel: ChannelModel, snr_db: float | None = None, trials: int = 1, seed: int = 0) -> list[dict]:
    """One symbol per trial through ``channel``; returns per-symbol records.

    Trial ``i`` draws its data from ``trial_rng(seed, i)`` and its noise from
    ``trial_rng(channel.rng_seed, i)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    c = Constellation(cfg.constellation)
    plan = cfg.plan
    h = cir_as_signal(channel, channel.max_delay + 1, plan.T_s)
    cost = backend_cost(cfg)
    out = []
    for t in range(trials):
        u = c.random_symbols(plan.M, trial_rng(seed, t))
        x = transmit(u, cfg)
        D = spread_and_map(u, cfg)
        ref = idft(D).samples
        y = apply_channel(x, channel, snr_db, nonce=t)
        res = rx_chain(y.samples, cfg, h)
        m = measure(u, res.u_hat, ref, x.samples[plan.K :], c, plan.overhead)
        out.append(
            dict(
                trial=t,
                backend=cfg.backend,
                waveform=cfg.waveform,
                N=plan.N,
                K=cfg.K_emitted,
                evm_db=m.evm_db,
                ber=m.ber,
                rel_mse_db=m.rel_mse_db,
                mults_per_sample=cost,
            )
        )
    return out
