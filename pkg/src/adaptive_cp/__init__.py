"""Adaptive cyclic-prefix OFDM / DFT-s-OFDM with clock-change and Farrow transmit paths."""
from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .channel import ChannelModel, PowerDelayProfile, apply_channel, rms_delay_spread, trial_rng
from .dsp_core import ComplexSignal, SpectrumVector, dft, fft_pow2, idft, ideal_resample, ifft_pow2
from .errors import AdaptiveCPError, PlanningError
from .numerology import (
    ClockedPlan,
    NumerologyPlan,
    UserDelayProfile,
    UserGroup,
    common_cp_for_group,
    enumerate_fixed_grid_cp,
    group_users_by_cp,
    plan_from_clock_rates,
    plan_from_delay_spread,
)
from .resampler import FarrowBank, PrototypeFilter, RationalRatio, design_lowpass, farrow_resample, fit_farrow, polyphase_resample
from .scenario import TwoUserScenario, run_single_user_sweep, run_two_user
from .transceiver import SubcarrierMap, TxConfig, make_tx_config, rx_chain, transmit, tx_chain

__all__ = [name for name in dir() if not name.startswith("_")]
