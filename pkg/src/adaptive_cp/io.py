"""File formats: signal CSV/binary, unit-labelled CSV tables, YAML configs."""
from __future__ import annotations

import csv
import io as _io
import json
import math
import struct
from pathlib import Path

import numpy as np
import yaml

from .dsp_core import ComplexSignal
from .numerology import ClockedPlan, NumerologyPlan, plan_from_delay_spread
from .resampler import FarrowBank
from .transceiver import SubcarrierMap, TxConfig, design_farrow_bank, make_tx_config
from .units import parse_duration, parse_frequency

UNITS = {
    "T": "s", "T_c": "s", "T_d": "s", "T_s": "s", "Ts_tilde": "s", "tau": "s",
    "symbol_time_residual": "s", "T_subframe": "s",
    "N": "count", "M": "count", "K": "count", "N_tilde": "count", "K_tilde": "count", "n": "count",
    "delta_f": "Hz", "B": "Hz", "Fs_tilde": "Hz", "B_tilde": "Hz",
    "overhead": "ratio", "ber": "ratio",
    "evm_db": "dB", "rel_mse_db": "dB", "evm_user2_mismatched_db": "dB", "evm_user2_common_db": "dB",
    "mults_per_sample": "mult/sample", "mults_farrow": "mult/sample", "mults_direct": "mult/sample",
    "mults_published": "mult/sample",
    "max_rel_err": "ratio",
    "L": "count", "p": "count", "alpha": "count",
    "trial": "index", "index": "index", "pair": "index",
    "direct_re": "a.u.", "direct_im": "a.u.", "farrow_re": "a.u.", "farrow_im": "a.u.",
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def header_name(field: str) -> str:
    unit = UNITS.get(field, "label")
    return f"{field} [{unit}]"


def strip_unit(name: str) -> str:
    return name.split(" [", 1)[0]


def write_table(rows: list[dict], fields, fh) -> None:
    """CSV with a ``name [unit]`` header row; floats use ``repr`` for exact round trips."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([header_name(f) for f in fields])
    for r in rows:
        w.writerow([_fmt(r.get(f, "")) for f in fields])


def table_to_string(rows: list[dict], fields) -> str:
    buf = _io.StringIO()
    write_table(rows, fields, buf)
    return buf.getvalue()


def read_table(fh) -> list[dict]:
    rd = csv.reader(fh)
    names = [strip_unit(n) for n in next(rd)]
    return [dict(zip(names, row)) for row in rd]


# -- signals -------------------------------------------------------------

SIGNAL_MAGIC = b"ACPS"
_HEADER = struct.Struct("<4sQd")


def signal_to_csv(sig: ComplexSignal, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, v in enumerate(sig.samples):
        w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def signal_from_csv(fh, sample_period: float = 1.0) -> ComplexSignal:
    rd = csv.reader(fh)
    next(rd)
    vals = [complex(float(r[1]), float(r[2])) for r in rd]
    return ComplexSignal(np.array(vals), sample_period)


def signal_to_bytes(sig: ComplexSignal) -> bytes:
    """Header ``(magic, uint64 length, float64 sample_period)`` then interleaved re/im, all little-endian."""
    body = np.empty(2 * len(sig), dtype="<f8")
    body[0::2] = sig.samples.real
    body[1::2] = sig.samples.imag
    return _HEADER.pack(SIGNAL_MAGIC, len(sig), sig.sample_period) + body.tobytes()


def signal_from_bytes(data: bytes) -> ComplexSignal:
    magic, n, period = _HEADER.unpack_from(data)
    if magic != SIGNAL_MAGIC:
        raise ValueError("not a signal file (bad magic)")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * n:
        raise ValueError(f"header says {n} samples, payload holds {body.size // 2}")
    return ComplexSignal(body[0::2] + 1j * body[1::2], period)


# -- configs ---------------------------------------------------------------

def load_config(path) -> dict:
    """Parse a YAML (or JSON) config file into a dict."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return data


def dump_sidecar(config: dict) -> str:
    return json.dumps(config, sort_keys=True, indent=2, default=str) + "\n"


def plan_from_config(cfg: dict) -> NumerologyPlan:
    """Either a full plan record or planning inputs ``T, B, tau[, cp_multiple, M]``."""
    if "T_c" in cfg and "N" in cfg:
        return NumerologyPlan.from_record(cfg)
    return plan_from_delay_spread(
        parse_duration(cfg["T"]),
        parse_frequency(cfg["B"]),
        parse_duration(cfg.get("tau", 0.0)),
        float(cfg.get("cp_multiple", 6.0)),
        None if cfg.get("M") is None else int(cfg["M"]),
    )


def tx_config_from_dict(cfg: dict, base_dir: Path | None = None) -> TxConfig:
    """Build a :class:`TxConfig` from a mapping with the same field names.

    ``farrow`` is either design parameters ``{L, p, alpha, stopband_atten}``
    or the path of a saved bank file.
    """
    plan = plan_from_config(cfg["plan"])
    m = cfg.get("map", {}) or {}
    mapping = SubcarrierMap(m.get("mode", "localized"), plan.N, plan.M, int(m.get("offset", 0)), int(m.get("stride", 1)))
    backend = cfg.get("backend", "direct")
    N_tilde = cfg.get("N_tilde")
    bank = None
    if backend == "farrow":
        clocked = ClockedPlan.from_plan(plan, None if N_tilde is None else int(N_tilde))
        fc = cfg.get("farrow", {}) or {}
        if isinstance(fc, str):
            p = Path(fc)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            bank = FarrowBank.from_text(p.read_text())
        else:
            bank = design_farrow_bank(
                plan.N, clocked.N_tilde, int(fc.get("L", 231)), int(fc.get("p", 9)),
                int(fc.get("alpha", 4)), float(fc.get("stopband_atten", 60.0)),
            )
    return make_tx_config(
        plan,
        cfg.get("waveform", "dfts_ofdm"),
        backend,
        mapping,
        None if N_tilde is None else int(N_tilde),
        bank,
        constellation=cfg.get("constellation", "qpsk"),
        equalizer=cfg.get("equalizer", "zf"),
        noise_var=float(cfg.get("noise_var", 0.0)),
    )


def load_tx_config(path) -> TxConfig:
    return tx_config_from_dict(load_config(path), Path(path).parent)
