"""Symbol-timing arithmetic for adaptive cyclic prefixes.

The overall symbol time ``T`` is held constant while the CP duration ``T_c``
follows the delay spread; the data portion ``T_d = T - T_c`` and its sample
count ``N`` shrink or grow accordingly at a fixed DAC sample period ``T_s``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

from .errors import (
    BlockTooLargeError,
    CPExceedsSymbolError,
    EmptyGroupError,
    NoFeasibleClockError,
    OutOfRangeError,
    PlanningError,
)

DEFAULT_CP_MULTIPLE = 6.0

# Relative slack for treating a float ratio as an exact integer before
# ceil/round, e.g. 16 us / 31.25 ns = 512.0000000001.
_INT_SNAP = 1e-9


def snap_ceil(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _INT_SNAP * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class NumerologyPlan:
    """Timing parameters of one symbol configuration (SI units, counts as int).

    ``delta_f`` is the subcarrier spacing of the N-point transform clocked at
    ``T_s``, i.e. ``1 / (N * T_s)``; it equals ``1 / T_d`` up to the rounding
    of ``N``.
    """

    T: float
    T_c: float
    T_d: float
    T_s: float
    N: int
    M: int
    K: int
    delta_f: float
    B: float

    def __post_init__(self):
        if not _close(self.T, self.T_c + self.T_d, 1e-12):
            raise PlanningError("T must equal T_c + T_d")
        if not (0.0 <= self.T_c < self.T):
            raise CPExceedsSymbolError(f"CP duration {self.T_c!r} s must lie in [0, T={self.T!r} s)")
        if self.T_s <= 0:
            raise PlanningError("T_s must be positive")
        if not (1 <= self.M <= self.N):
            raise BlockTooLargeError(f"block length M={self.M} must satisfy 1 <= M <= N={self.N}")
        if self.K != snap_ceil(self.T_c / self.T_s):
            raise PlanningError("K must equal ceil(T_c / T_s)")
        if self.N != round(self.T_d / self.T_s):
            raise PlanningError("N must equal round(T_d / T_s)")
        if not _close(self.B, 1.0 / self.T_s, 1e-9) or not _close(self.N * self.delta_f, self.B, 1e-9):
            raise PlanningError("B must equal N * delta_f = 1 / T_s")

    @classmethod
    def build(cls, T: float, T_c: float, T_s: float, M: int | None = None) -> "NumerologyPlan":
        """Derive counts and rates for a symbol of duration ``T`` with CP ``T_c``."""
        if T_s <= 0:
            raise PlanningError("T_s must be positive")
        if not (0.0 <= T_c < T):
            raise CPExceedsSymbolError(
                f"CP duration {T_c!r} s exceeds the symbol time T={T!r} s"
            )
        T_d = T - T_c
        N = int(round(T_d / T_s))
        if N < 1:
            raise PlanningError("data portion shorter than one sample")
        M = N if M is None else int(M)
        if M > N:
            raise BlockTooLargeError(f"block length M={M} exceeds data-portion samples N={N}")
        if M < 1:
            raise BlockTooLargeError("block length M must be at least 1")
        return cls(
            T=T,
            T_c=T_c,
            T_d=T_d,
            T_s=T_s,
            N=N,
            M=M,
            K=snap_ceil(T_c / T_s),
            delta_f=1.0 / (N * T_s),
            B=1.0 / T_s,
        )

    @property
    def overhead(self) -> float:
        """Fraction of the symbol time spent on the CP."""
        return self.T_c / self.T

    @property
    def symbol_time_residual(self) -> float:
        """Emitted duration ``(N + K) * T_s`` minus the target ``T``."""
        return (self.N + self.K) * self.T_s - self.T

    def to_record(self) -> dict:
        return asdict(self)

    @classmethod
    def from_record(cls, record: dict) -> "NumerologyPlan":
        kw = {}
        for f in fields(cls):
            v = record[f.name]
            kw[f.name] = int(v) if f.name in ("N", "M", "K") else float(v)
        return cls(**kw)


@dataclass(frozen=True)
class ClockedPlan:
    """Power-of-two transform size with a changed DAC/ADC clock."""

    base: NumerologyPlan
    N_tilde: int
    Ts_tilde: float
    Fs_tilde: float
    K_tilde: int
    B_tilde: float
    symbol_time_residual: float

    def __post_init__(self):
        if not is_power_of_two(self.N_tilde):
            raise PlanningError(f"N_tilde={self.N_tilde} is not a power of two")
        if self.N_tilde < self.base.N:
            raise PlanningError("N_tilde must be at least N")
        if not _close(self.N_tilde * self.Ts_tilde, self.base.N * self.base.T_s, 1e-9):
            raise PlanningError("N_tilde * Ts_tilde must equal N * T_s")

    @classmethod
    def from_plan(cls, plan: NumerologyPlan, N_tilde: int | None = None) -> "ClockedPlan":
        """Clock the data portion of ``plan`` through an ``N_tilde``-point IFFT.

        ``N_tilde`` defaults to the next power of two at or above ``plan.N``.
        """
        if N_tilde is None:
            N_tilde = next_power_of_two(plan.N)
        Ts_tilde = plan.N * plan.T_s / N_tilde
        K_tilde = snap_ceil(plan.T_c / Ts_tilde)
        return cls(
            base=plan,
            N_tilde=int(N_tilde),
            Ts_tilde=Ts_tilde,
            Fs_tilde=1.0 / Ts_tilde,
            K_tilde=K_tilde,
            B_tilde=plan.N / (N_tilde * Ts_tilde),
            symbol_time_residual=(N_tilde + K_tilde) * Ts_tilde - plan.T,
        )

    def to_record(self) -> dict:
        rec = self.base.to_record()
        rec.update(
            N_tilde=self.N_tilde,
            Ts_tilde=self.Ts_tilde,
            Fs_tilde=self.Fs_tilde,
            K_tilde=self.K_tilde,
            B_tilde=self.B_tilde,
            symbol_time_residual=self.symbol_time_residual,
        )
        return rec

    @classmethod
    def from_record(cls, record: dict) -> "ClockedPlan":
        return cls(
            base=NumerologyPlan.from_record(record),
            N_tilde=int(record["N_tilde"]),
            Ts_tilde=float(record["Ts_tilde"]),
            Fs_tilde=float(record["Fs_tilde"]),
            K_tilde=int(record["K_tilde"]),
            B_tilde=float(record["B_tilde"]),
            symbol_time_residual=float(record["symbol_time_residual"]),
        )


@dataclass(frozen=True)
class UserDelayProfile:
    user_id: object
    tau: float
    cp_multiple: float = DEFAULT_CP_MULTIPLE

    def __post_init__(self):
        if self.tau < 0:
            raise PlanningError("tau must be non-negative")
        if self.cp_multiple <= 0:
            raise PlanningError("cp_multiple must be positive")

    @property
    def required_cp(self) -> float:
        return self.cp_multiple * self.tau


@dataclass(frozen=True)
class UserGroup:
    """Users sharing one CP duration ``T_c``."""

    T_c: float
    users: tuple = field(default_factory=tuple)


def plan_from_delay_spread(
    T: float,
    B: float,
    tau: float,
    cp_multiple: float = DEFAULT_CP_MULTIPLE,
    M: int | None = None,
) -> NumerologyPlan:
    """Size the CP as ``cp_multiple * tau`` inside a symbol of fixed duration ``T``.

    Parameters
    ----------
    T : float
        Overall symbol time in seconds (CP plus data portion).
    B : float
        Signal bandwidth in hertz; the DAC sample period is ``1 / B``.
    tau : float
        RMS delay spread in seconds.
    cp_multiple : float
        Design margin applied to ``tau``.
    M : int, optional
        QAM block length; defaults to ``N``.

    Raises
    ------
    CPExceedsSymbolError
        If the CP would fill the whole symbol.
    BlockTooLargeError
        If ``M`` exceeds the resulting ``N``.
    """
    if B <= 0:
        raise PlanningError("bandwidth must be positive")
    if tau < 0:
        raise PlanningError("tau must be non-negative")
    T_c = cp_multiple * tau
    if T_c >= T:
        raise CPExceedsSymbolError(
            f"required CP {T_c!r} s (= {cp_multiple} x tau) is not shorter than T={T!r} s"
        )
    return NumerologyPlan.build(T, T_c, 1.0 / B, M)


def overhead_fixed_data_portion(T_d: float, tau: float, cp_multiple: float = DEFAULT_CP_MULTIPLE) -> float:
    """CP overhead when the data portion is fixed and the symbol grows with the CP."""
    if T_d <= 0:
        raise PlanningError("T_d must be positive")
    if tau < 0:
        raise PlanningError("tau must be non-negative")
    T_c = cp_multiple * tau
    return T_c / (T_d + T_c)


def enumerate_fixed_grid_cp(T_subframe: float, T_d: float) -> list[tuple[int, float, float]]:
    """All ``(n, T_c, overhead)`` with ``n * (T_d + T_c) == T_subframe``, ``T_c >= 0``.

    Sorted by ascending overhead, which is also descending ``n``.
    """
    if not (T_subframe >= T_d > 0):
        raise PlanningError("need T_subframe >= T_d > 0")
    n_max = int(math.floor(T_subframe / T_d * (1 + _INT_SNAP)))
    out = []
    for n in range(n_max, 0, -1):
        T_c = T_subframe / n - T_d
        if T_c < 0:
            if T_c > -_INT_SNAP * T_d:
                T_c = 0.0
            else:
                continue
        out.append((n, T_c, T_c / (T_c + T_d)))
    out.sort(key=lambda e: e[2])
    return out


def plan_from_clock_rates(
    T: float,
    T_s: float,
    N_tilde: int,
    clock_periods: Iterable[float],
    tau: float,
    cp_multiple: float = DEFAULT_CP_MULTIPLE,
    M: int | None = None,
    n_tolerance: float = 0.5,
) -> ClockedPlan:
    """Work backwards from available DAC clock periods to a clocked plan.

    For each candidate period the data portion is ``N_tilde * Ts_tilde`` and
    the CP takes the rest of ``T``. Among candidates whose CP covers
    ``cp_multiple * tau`` and whose implied ``N`` is within ``n_tolerance``
    of an integer, the one with the shortest CP wins (ties: smaller period).
    """
    if not is_power_of_two(N_tilde):
        raise PlanningError(f"N_tilde={N_tilde} is not a power of two")
    periods = list(clock_periods)
    if not periods:
        raise PlanningError("no clock periods given")
    need = cp_multiple * tau
    best = None
    for Ts_tilde in periods:
        if Ts_tilde <= 0:
            raise PlanningError("clock periods must be positive")
        data = N_tilde * Ts_tilde
        T_c = T - data
        if T_c < 0 and T_c > -_INT_SNAP * T:
            T_c = 0.0
        if T_c < 0 or T_c < need * (1 - _INT_SNAP):
            continue
        n_real = data / T_s
        if abs(n_real - round(n_real)) > n_tolerance:
            continue
        key = (T_c, Ts_tilde)
        if best is None or key < best[0]:
            best = (key, Ts_tilde, T_c)
    if best is None:
        raise NoFeasibleClockError(
            f"no feasible clock: none of {len(periods)} periods leaves a CP of at least {need!r} s"
        )
    _, Ts_tilde, T_c = best
    N = int(round(N_tilde * Ts_tilde / T_s))
    if N > N_tilde:
        raise NoFeasibleClockError("no feasible clock: implied N exceeds N_tilde")
    # T_d is pinned to N * T_s so that N_tilde * Ts_tilde == N * T_s holds.
    T_c = T - N * T_s
    if abs(T_c) <= _INT_SNAP * T:
        T_c = 0.0
    base = NumerologyPlan.build(T, T_c, T_s, M)
    K_tilde = snap_ceil(base.T_c / Ts_tilde)
    return ClockedPlan(
        base=base,
        N_tilde=N_tilde,
        Ts_tilde=Ts_tilde,
        Fs_tilde=1.0 / Ts_tilde,
        K_tilde=K_tilde,
        B_tilde=base.N / (N_tilde * Ts_tilde),
        symbol_time_residual=(N_tilde + K_tilde) * Ts_tilde - T,
    )


def common_cp_for_group(users: Sequence[UserDelayProfile]) -> float:
    """CP duration that covers every user scheduled together."""
    if not users:
        raise EmptyGroupError("cannot size a CP for an empty group")
    return max(u.required_cp for u in users)


def group_users_by_cp(users: Sequence[UserDelayProfile], bin_edges: Sequence[float]) -> list[UserGroup]:
    """Bin users by required CP; each bin uses its upper edge as common CP.

    Only non-empty bins are returned, in edge order.
    """
    edges = [float(e) for e in bin_edges]
    if not edges or any(b <= a for a, b in zip(edges, edges[1:])):
        raise PlanningError("bin edges must be non-empty and strictly increasing")
    buckets: list[list[UserDelayProfile]] = [[] for _ in edges]
    for u in users:
        need = u.required_cp
        for i, edge in enumerate(edges):
            if need <= edge:
                buckets[i].append(u)
                break
        else:
            raise OutOfRangeError(
                f"user {u.user_id!r} needs a CP of {need!r} s, above the last edge {edges[-1]!r} s"
            )
    return [UserGroup(T_c=edge, users=tuple(b)) for edge, b in zip(edges, buckets) if b]
