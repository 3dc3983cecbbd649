"""Tapped-delay-line multipath channel, noise and delay-spread statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsp_core import ComplexSignal, as_array
from .errors import LengthTooShortError, ZeroPowerError


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *keys)``.

    The stream is ``Generator(Philox(SeedSequence([seed, *keys])))``; the
    mapping is stable across runs and platforms, so trial ``i`` can be
    recomputed on its own.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True)
class PowerDelayProfile:
    """``entries`` is a sequence of ``(delay_seconds, power)`` pairs."""

    entries: tuple

    def __post_init__(self):
        ent = tuple((float(d), float(p)) for d, p in self.entries)
        if not ent:
            raise ZeroPowerError("empty power delay profile")
        if any(p < 0 for _, p in ent):
            raise ValueError("powers must be non-negative")
        if any(b[0] < a[0] for a, b in zip(ent, ent[1:])):
            raise ValueError("delays must be non-decreasing")
        object.__setattr__(self, "entries", ent)


def rms_delay_spread(pdp: PowerDelayProfile) -> float:
    """Square root of the second central moment of the power delay profile."""
    d = np.array([e[0] for e in pdp.entries])
    p = np.array([e[1] for e in pdp.entries])
    total = p.sum()
    if total <= 0:
        raise ZeroPowerError("power delay profile has zero total power")
    mean = (p * d).sum() / total
    var = (p * (d - mean) ** 2).sum() / total
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class ChannelModel:
    """Static CIR with integer sample delays; ``taps`` are ``(delay, gain)``."""

    taps: tuple
    rng_seed: int = 0

    def __post_init__(self):
        taps = tuple((int(d), complex(g)) for d, g in self.taps)
        if not taps:
            raise ValueError("a channel needs at least one tap")
        delays = [d for d, _ in taps]
        if delays[0] < 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("tap delays must be non-negative and strictly increasing")
        if sum(abs(g) ** 2 for _, g in taps) <= 0:
            raise ZeroPowerError("channel has zero total power")
        object.__setattr__(self, "taps", taps)

    @property
    def max_delay(self) -> int:
        return self.taps[-1][0]

    def power_delay_profile(self, T_s: float = 1.0) -> PowerDelayProfile:
        return PowerDelayProfile(tuple((d * T_s, abs(g) ** 2) for d, g in self.taps))

    @classmethod
    def from_dense(cls, h, rng_seed: int = 0) -> "ChannelModel":
        hv = as_array(h)
        nz = np.flatnonzero(hv)
        return cls(tuple((int(i), hv[i]) for i in nz), rng_seed)

    @classmethod
    def from_delays(cls, delays_s: Sequence[float], gains: Sequence[complex], T_s: float, rng_seed: int = 0):
        """Round physical delays to the sample grid; taps landing on one sample add up."""
        acc: dict[int, complex] = {}
        for d, g in zip(delays_s, gains):
            k = int(round(d / T_s))
            acc[k] = acc.get(k, 0j) + complex(g)
        return cls(tuple(sorted(acc.items())), rng_seed)


def cir_as_signal(ch: ChannelModel, length: int, T_s: float = 1.0) -> ComplexSignal:
    """Dense CIR vector with ``h[delay] = gain``."""
    if length <= ch.max_delay:
        raise LengthTooShortError(f"length {length} cannot hold a tap at delay {ch.max_delay}")
    h = np.zeros(length, dtype=np.complex128)
    for d, g in ch.taps:
        h[d] = g
    return ComplexSignal(h, T_s)


def add_noise(y: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular white Gaussian noise at ``snr_db`` against the power of ``y``."""
    power = np.mean(np.abs(y) ** 2)
    var = power / 10.0 ** (snr_db / 10.0)
    noise = rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)
    return y + noise * math.sqrt(var / 2.0)


def apply_channel(x, ch: ChannelModel, snr_db: float | None = None, nonce: int = 0) -> ComplexSignal:
    """Linear convolution with the CIR plus optional AWGN.

    The output has ``len(x) + max_delay`` samples. Noise is drawn from
    :func:`trial_rng` with ``(ch.rng_seed, nonce)``.
    """
    xv = as_array(x)
    if xv.size < 1:
        raise ValueError("empty input signal")
    y = np.zeros(xv.size + ch.max_delay, dtype=np.complex128)
    for d, g in ch.taps:
        y[d : d + xv.size] += g * xv
    if snr_db is not None and math.isfinite(snr_db):
        y = add_noise(y, snr_db, trial_rng(ch.rng_seed, nonce))
    period = x.sample_period if isinstance(x, ComplexSignal) else 1.0
    return ComplexSignal(y, period)


# Two equal-power taps at 0 and 2*tau have RMS delay spread tau.
PRESET_RMS_SPREADS = {
    "mmw73-min": 1.0e-9,
    "mmw73-avg": 12.1e-9,
    "mmw73-max": 200.3e-9,
}


def preset_profile(name: str) -> list[tuple[float, float, float]]:
    """Preset as ``[(delay_ns, gain_re, gain_im), ...]``."""
    try:
        tau = PRESET_RMS_SPREADS[name]
    except KeyError:
        raise ValueError(f"unknown channel preset {name!r}; known: {sorted(PRESET_RMS_SPREADS)}") from None
    g = 1.0 / math.sqrt(2.0)
    return [(0.0, g, 0.0), (2.0 * tau * 1e9, g, 0.0)]


def channel_from_config(cfg: dict, T_s: float) -> ChannelModel:
    """Build a channel from ``{"preset": name}`` or ``{"taps": [[delay_ns, re, im], ...]}``.

    An optional ``seed`` key sets the noise seed.
    """
    seed = int(cfg.get("seed", 0))
    if "preset" in cfg:
        rows = preset_profile(cfg["preset"])
    elif "taps" in cfg:
        rows = cfg["taps"]
    else:
        raise ValueError("channel config needs 'preset' or 'taps'")
    delays = [float(r[0]) * 1e-9 for r in rows]
    gains = [complex(float(r[1]), float(r[2]) if len(r) > 2 else 0.0) for r in rows]
    return ChannelModel.from_delays(delays, gains, T_s, seed)


def exponential_channel(tau: float, span: int, T_s: float, rng: np.random.Generator, seed: int = 0) -> ChannelModel:
    """Rayleigh taps on ``0..span`` samples with an exponential profile of scale ``tau``.

    Total power is normalized to one.
    """
    n = np.arange(span + 1)
    if tau > 0:
        power = np.exp(-n * T_s / tau)
    else:
        power = np.zeros(span + 1)
        power[0] = 1.0
    power /= power.sum()
    g = (rng.standard_normal(span + 1) + 1j * rng.standard_normal(span + 1)) * np.sqrt(power / 2.0)
    g[0] = g[0] if abs(g[0]) > 0 else 1.0
    g /= math.sqrt(np.sum(np.abs(g) ** 2))
    return ChannelModel(tuple((int(i), g[i]) for i in range(span + 1) if g[i] != 0), seed)
