"""Reproducible experiments: delay-spread sweeps and the two-user CP mismatch."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelModel, add_noise, apply_channel, channel_from_config, cir_as_signal, exponential_channel, trial_rng
from .dsp_core import as_array
from .errors import ConfigMismatchError, OverlappingSubcarrierError
from .numerology import (
    DEFAULT_CP_MULTIPLE,
    NumerologyPlan,
    UserDelayProfile,
    common_cp_for_group,
    plan_from_delay_spread,
    snap_ceil,
)
from .transceiver import Constellation, SubcarrierMap, TxConfig, make_tx_config, rx_chain, transmit, tx_chain
from .units import parse_duration, parse_frequency

SWEEP_FIELDS = ("tau", "T", "T_c", "N", "K", "overhead", "evm_db", "ber")


def _db(err: float, ref: float) -> float:
    return -150.0 if err <= 0 else max(-150.0, 10.0 * math.log10(err / ref))


def run_single_user_sweep(
    taus,
    B: float,
    T: float | None = None,
    cp_multiple: float = DEFAULT_CP_MULTIPLE,
    snr_db: float | None = None,
    trials: int = 1,
    seed: int = 0,
    T_d: float | None = None,
    M: int | None = None,
    waveform: str = "dfts_ofdm",
    backend: str = "direct",
    records: list | None = None,
) -> list[dict]:
    """One row per delay spread: planned CP, overhead and link quality.

    Exactly one of ``T`` (constant symbol time) and ``T_d`` (constant data
    portion, symbol time ``T_d + cp_multiple * tau``) must be given. Each
    trial draws a Rayleigh channel with an exponential profile of scale
    ``tau`` spanning ``cp_multiple * tau``, so the CIR never outlasts the CP.
    Per-symbol link records are appended to ``records`` when given.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if (T is None) == (T_d is None):
        raise ValueError("give exactly one of T and T_d")
    c = Constellation()
    rows = []
    for i, tau in enumerate(taus):
        T_sym = T if T is not None else T_d + cp_multiple * tau
        plan = plan_from_delay_spread(T_sym, B, tau, cp_multiple, None)
        m_blk = M if M is not None else (plan.N if waveform == "ofdm" else max(1, plan.N // 2))
        plan = replace(plan, M=m_blk)
        cfg = make_tx_config(plan, waveform, backend)
        span = min(plan.K, int(math.floor(cp_multiple * tau / plan.T_s * (1 + 1e-12))))
        err = ref = 0.0
        nbit_err = nbits = 0
        for t in range(trials):
            ch = exponential_channel(tau, span, plan.T_s, trial_rng(seed, i, t, 1), seed=seed)
            u = c.random_symbols(plan.M, trial_rng(seed, i, t, 0))
            x = transmit(u, cfg)
            y = apply_channel(x, ch, snr_db, nonce=(i << 32) | t)
            h = cir_as_signal(ch, ch.max_delay + 1)
            u_hat = rx_chain(y.samples, cfg, h).u_hat
            e = float(np.sum(np.abs(u_hat - u) ** 2))
            r = float(np.sum(np.abs(u) ** 2))
            be = int(np.sum(c.demodulate(u) != c.demodulate(u_hat)))
            err += e
            ref += r
            nbit_err += be
            nbits += plan.M * c.bits_per_symbol
            if records is not None:
                records.append(
                    dict(trial=t, backend=backend, waveform=waveform, N=plan.N, K=cfg.K_emitted,
                         evm_db=_db(e, r), ber=be / (plan.M * c.bits_per_symbol),
                         rel_mse_db=float("nan"), mults_per_sample=float("nan"))
                )
        rows.append(
            dict(tau=tau, T=plan.T, T_c=plan.T_c, N=plan.N, K=plan.K, overhead=plan.overhead,
                 evm_db=_db(err, ref), ber=nbit_err / nbits)
        )
    return rows


@dataclass(frozen=True)
class TwoUserScenario:
    """Two users on disjoint subcarriers, received at user 2.

    Both users share ``N`` and ``T_s`` from ``plan_common``; each prepends
    its own CP, so with ``cp_user1 < cp_user2`` user 1's symbol boundaries
    drift through user 2's DFT windows. ``channel_user1`` is the channel
    from user 1's transmission to user 2's receiver.
    """

    plan_common: NumerologyPlan
    cp_user1: float
    cp_user2: float
    map_user1: SubcarrierMap
    map_user2: SubcarrierMap
    channel_user1: ChannelModel
    channel_user2: ChannelModel
    offset: int = 0
    snr_db: float | None = None
    n_symbols: int = 7
    waveform: str = "dfts_ofdm"
    user1_active: bool = True

    def __post_init__(self):
        N = self.plan_common.N
        if self.map_user1.N != N or self.map_user2.N != N:
            raise ConfigMismatchError("subcarrier maps must span the common N")
        if np.intersect1d(self.map_user1.indices, self.map_user2.indices).size:
            raise OverlappingSubcarrierError("user subcarrier sets overlap")
        if self.n_symbols < 2:
            raise ValueError("need at least two symbols (the first is not scored)")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")

    def user_config(self, cp: float, mapping: SubcarrierMap) -> TxConfig:
        pc = self.plan_common
        plan = NumerologyPlan.build(pc.N * pc.T_s + cp, cp, pc.T_s, mapping.M)
        return make_tx_config(plan, self.waveform, "direct", mapping)


@dataclass(frozen=True)
class TwoUserResult:
    evm_user2_mismatched: float
    evm_user2_common: float
    trials: list = field(default_factory=list)


def _user2_error(sc: TwoUserScenario, cp1: float, cp2: float, trial: int, seed: int) -> tuple[float, float]:
    c = Constellation()
    cfg1 = sc.user_config(cp1, sc.map_user1)
    cfg2 = sc.user_config(cp2, sc.map_user2)
    N, K1, K2 = sc.plan_common.N, cfg1.plan.K, cfg2.plan.K
    span = sc.n_symbols * (N + K2)
    n1 = -(-(span + sc.offset) // (N + K1)) + 1
    rng1 = trial_rng(seed, trial, 1)
    rng2 = trial_rng(seed, trial, 2)
    u1 = [c.random_symbols(cfg1.plan.M, rng1) for _ in range(n1)]
    u2 = [c.random_symbols(cfg2.plan.M, rng2) for _ in range(sc.n_symbols)]
    s2 = np.concatenate([tx_chain(u, cfg2).samples for u in u2])
    rx = as_array(apply_channel(s2, sc.channel_user2))[:span].copy()
    if sc.user1_active:
        s1 = np.concatenate([tx_chain(u, cfg1).samples for u in u1])
        y1 = as_array(apply_channel(s1, sc.channel_user1))
        y1 = np.concatenate([np.zeros(sc.offset, dtype=np.complex128), y1])[:span]
        rx[: y1.size] += y1
    if sc.snr_db is not None and math.isfinite(sc.snr_db):
        rx = add_noise(rx, sc.snr_db, trial_rng(sc.channel_user2.rng_seed, trial))
    h2 = cir_as_signal(sc.channel_user2, sc.channel_user2.max_delay + 1).samples
    err = ref = 0.0
    for s in range(1, sc.n_symbols):
        start = s * (N + K2)
        u_hat = rx_chain(rx[start : start + N + K2], cfg2, h2).u_hat
        err += float(np.sum(np.abs(u_hat - u2[s]) ** 2))
        ref += float(np.sum(np.abs(u2[s]) ** 2))
    return err, ref


def run_two_user(sc: TwoUserScenario, trials: int = 1, seed: int = 0) -> TwoUserResult:
    """User-2 EVM with the configured CPs and with a common CP for both users.

    The common CP is the group maximum from :func:`common_cp_for_group`.
    Only symbols after the first are scored.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    group = [
        UserDelayProfile(1, sc.cp_user1 / DEFAULT_CP_MULTIPLE),
        UserDelayProfile(2, sc.cp_user2 / DEFAULT_CP_MULTIPLE),
    ]
    cp_common = common_cp_for_group(group)
    rows = []
    tot = np.zeros(4)
    for t in range(trials):
        em, rm = _user2_error(sc, sc.cp_user1, sc.cp_user2, t, seed)
        ec, rc = _user2_error(sc, cp_common, cp_common, t, seed)
        tot += (em, rm, ec, rc)
        rows.append(dict(trial=t, evm_user2_mismatched_db=_db(em, rm), evm_user2_common_db=_db(ec, rc)))
    return TwoUserResult(_db(tot[0], tot[1]), _db(tot[2], tot[3]), rows)


def user2_error_energy(sc: TwoUserScenario, trials: int = 1, seed: int = 0) -> float:
    """User-2 error energy with the scenario's own CPs, averaged over trials.

    A single realization fluctuates with the data; the average grows with
    the CP mismatch.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return sum(_user2_error(sc, sc.cp_user1, sc.cp_user2, t, seed)[0] for t in range(trials)) / trials


def default_two_user_scenario(**overrides) -> TwoUserScenario:
    """N=256 at 32 MHz, user 1 CP 0.5 us (16 samples), user 2 CP 2 us (64 samples).

    User 1's channel has its last tap at 64 samples, so it needs the longer CP.
    """
    T_s = 1.0 / 32e6
    N = 256
    plan = NumerologyPlan.build(N * T_s + 64 * T_s, 64 * T_s, T_s, N)
    kw = dict(
        plan_common=plan,
        cp_user1=16 * T_s,
        cp_user2=64 * T_s,
        map_user1=SubcarrierMap("localized", N, 128, 0),
        map_user2=SubcarrierMap("localized", N, 128, 128),
        channel_user1=ChannelModel(((0, 1.0), (30, 0.5), (64, 0.4)), 11),
        channel_user2=ChannelModel(((0, 1.0), (10, 0.5j), (40, 0.3)), 12),
    )
    kw.update(overrides)
    return TwoUserScenario(**kw)


def scenario_from_config(cfg: dict) -> TwoUserScenario:
    """Build a scenario from a parsed scenario file.

    Keys: ``B``, ``N``, ``cp_user1``, ``cp_user2`` and per-user sections
    ``user1``/``user2`` with ``map`` (``mode``, ``offset``, ``stride``, ``M``)
    and ``channel`` (``preset`` or ``taps`` in ns). Optional: ``offset``,
    ``snr_db``, ``n_symbols``, ``waveform``.
    """
    T_s = 1.0 / parse_frequency(cfg.get("B", "32MHz"))
    N = int(cfg.get("N", 256))
    cp1 = parse_duration(cfg["cp_user1"])
    cp2 = parse_duration(cfg["cp_user2"])
    plan = NumerologyPlan.build(N * T_s + max(cp1, cp2), max(cp1, cp2), T_s, N)

    def user(key: str, default_offset: int):
        sec = cfg.get(key, {})
        m = sec.get("map", {})
        mapping = SubcarrierMap(
            m.get("mode", "localized"), N, int(m.get("M", N // 2)), int(m.get("offset", default_offset)), int(m.get("stride", 1))
        )
        ch = channel_from_config(sec.get("channel", {"taps": [[0, 1, 0]]}), T_s)
        return mapping, ch

    map1, ch1 = user("user1", 0)
    map2, ch2 = user("user2", N // 2)
    snr = cfg.get("snr_db")
    return TwoUserScenario(
        plan_common=plan,
        cp_user1=cp1,
        cp_user2=cp2,
        map_user1=map1,
        map_user2=map2,
        channel_user1=ch1,
        channel_user2=ch2,
        offset=int(cfg.get("offset", 0)),
        snr_db=None if snr is None else float(snr),
        n_symbols=int(cfg.get("n_symbols", 7)),
        waveform=cfg.get("waveform", "dfts_ofdm"),
        user1_active=bool(cfg.get("user1_active", True)),
    )
