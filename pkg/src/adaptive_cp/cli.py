"""Command-line front end.

Each command writes a unit-labelled CSV (``--out``, else
``$ADAPTIVE_CP_OUTPUT_DIR/<command>.csv``, else stdout) and a JSON sidecar
with the fully resolved configuration. Exit codes: 0 success, 1 internal
error, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import trial_rng
from .dsp_core import ComplexSignal, idft, ideal_resample, ifft_pow2, zero_pad_spectrum
from .errors import AdaptiveCPError
from .io import dump_sidecar, load_config, table_to_string, write_table
from .numerology import (
    NumerologyPlan,
    enumerate_fixed_grid_cp,
    plan_from_clock_rates,
    plan_from_delay_spread,
)
from .resampler import FarrowBank, PUBLISHED_FARROW_MULTS, RationalRatio, direct_idft_cost, multiplications_per_sample
from .scenario import SWEEP_FIELDS, default_two_user_scenario, run_single_user_sweep, run_two_user, scenario_from_config
from .transceiver import RECORD_FIELDS, design_farrow_bank, error_db, farrow_data_portion
from .units import parse_duration, parse_frequency

OUTPUT_DIR_ENV = "ADAPTIVE_CP_OUTPUT_DIR"

PLAN_FIELDS = ("T", "T_c", "T_d", "T_s", "N", "M", "K", "delta_f", "B", "overhead", "symbol_time_residual")
CLOCKED_FIELDS = PLAN_FIELDS[:-1] + ("N_tilde", "Ts_tilde", "Fs_tilde", "K_tilde", "B_tilde", "symbol_time_residual")
GRID_FIELDS = ("n", "T_c", "overhead")
BENCH_FIELDS = ("N", "N_tilde", "L", "p", "alpha", "rel_mse_db", "mults_farrow", "mults_direct", "mults_published", "note")
SAMPLE_FIELDS = ("index", "direct_re", "farrow_re", "direct_im", "farrow_im")
THEOREM_FIELDS = ("pair", "N", "N_tilde", "max_rel_err")
MULTIUSER_FIELDS = ("trial", "evm_user2_mismatched_db", "evm_user2_common_db")

DEFAULTS = {
    "plan": dict(mult=6.0, M=None, tau="0", lte_grid=False, clocks=None, Ntilde=None, Ts=None, subframe="500us", Td=None),
    "lte-grid": dict(subframe="500us", Td="66.7us"),
    "sweep": dict(B="512MHz", T=None, Td=None, mult=6.0, snr=None, trials=1, seed=0, M=None,
                  waveform="dfts_ofdm", backend="direct", records=None),
    "farrow-bench": dict(N=1543, Ntilde=2048, L=231, p=9, alpha=4, atten=60.0, seed=0, samples=None,
                         bank_in=None, bank_out=None, count=100),
    "theorem1": dict(pairs=20, seed=0, max_size=4096),
    "multiuser": dict(trials=1, seed=0),
}


class ConfigError(AdaptiveCPError):
    pass


def _req(cfg: dict, key: str):
    if cfg.get(key) is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return cfg[key]


# -- commands ---------------------------------------------------------------

def cmd_plan(cfg: dict):
    if cfg.get("lte_grid"):
        return cmd_lte_grid(dict(subframe=cfg["subframe"], Td=cfg.get("Td") or "66.7us"))
    T = parse_duration(_req(cfg, "T"))
    tau = parse_duration(cfg["tau"])
    M = None if cfg.get("M") is None else int(cfg["M"])
    if cfg.get("clocks"):
        periods = read_clock_file(cfg["clocks"])
        T_s = parse_duration(cfg["Ts"]) if cfg.get("Ts") else 1.0 / parse_frequency(_req(cfg, "B"))
        cp = plan_from_clock_rates(T, T_s, int(_req(cfg, "Ntilde")), periods, tau, float(cfg["mult"]), M)
        rec = cp.to_record()
        rec["overhead"] = cp.base.overhead
        return [rec], CLOCKED_FIELDS
    plan = plan_from_delay_spread(T, parse_frequency(_req(cfg, "B")), tau, float(cfg["mult"]), M)
    rec = plan.to_record()
    rec.update(overhead=plan.overhead, symbol_time_residual=plan.symbol_time_residual)
    return [rec], PLAN_FIELDS


def read_clock_file(path) -> list[float]:
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.extend(parse_duration(tok) for tok in line.replace(",", " ").split())
    if not out:
        raise ConfigError(f"{path}: no clock periods")
    return out


def cmd_lte_grid(cfg: dict):
    rows = [
        dict(n=n, T_c=tc, overhead=ov)
        for n, tc, ov in enumerate_fixed_grid_cp(parse_duration(cfg["subframe"]), parse_duration(cfg["Td"]))
    ]
    return rows, GRID_FIELDS


def _taus(spec) -> list[float]:
    if isinstance(spec, (list, tuple)):
        return [parse_duration(t) for t in spec]
    return [parse_duration(t) for t in str(spec).split(",") if t.strip()]


def cmd_sweep(cfg: dict):
    trials = int(cfg["trials"])
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    records = [] if cfg.get("records") else None
    rows = run_single_user_sweep(
        _taus(_req(cfg, "taus")),
        B=parse_frequency(cfg["B"]),
        T=None if cfg.get("T") is None else parse_duration(cfg["T"]),
        T_d=None if cfg.get("Td") is None else parse_duration(cfg["Td"]),
        cp_multiple=float(cfg["mult"]),
        snr_db=None if cfg.get("snr") is None else float(cfg["snr"]),
        trials=trials,
        seed=int(cfg["seed"]),
        M=None if cfg.get("M") is None else int(cfg["M"]),
        waveform=cfg["waveform"],
        backend=cfg["backend"],
        records=records,
    )
    extra = {}
    if records is not None:
        extra[cfg["records"]] = (records, RECORD_FIELDS)
    return rows, SWEEP_FIELDS, extra


def farrow_bench(N: int, N_tilde: int, L: int, p: int, alpha: int, atten: float, seed: int, bank: FarrowBank | None = None, count: int = 100):
    """Farrow versus direct IDFT on one random QPSK OFDM data portion.

    Returns the summary row, per-sample rows and the bank used.
    """
    if bank is None:
        bank = design_farrow_bank(N, N_tilde, L, p, alpha, atten)
    rng = trial_rng(seed, 0)
    D = (rng.choice([-1.0, 1.0], N) + 1j * rng.choice([-1.0, 1.0], N)) / math.sqrt(2.0)
    direct = idft(D).samples
    dt = ifft_pow2(zero_pad_spectrum(D, N_tilde)).samples
    if N == N_tilde:
        approx = dt
    else:
        approx = farrow_data_portion(dt, N, RationalRatio.for_sizes(bank.p, N_tilde, N), bank)
    n = min(count, N)
    rel = error_db(direct[:n], approx[:n])
    mults = multiplications_per_sample(bank.L, bank.p, bank.alpha, N, N_tilde)
    summary = dict(
        N=N, N_tilde=N_tilde, L=bank.L, p=bank.p, alpha=bank.alpha, rel_mse_db=rel,
        mults_farrow=mults, mults_direct=direct_idft_cost(N), mults_published=PUBLISHED_FARROW_MULTS,
        note=f"formula gives {mults:.2f}; published estimate {PUBLISHED_FARROW_MULTS} does not match the formula",
    )
    samples = [
        dict(index=i, direct_re=direct[i].real, farrow_re=approx[i].real, direct_im=direct[i].imag, farrow_im=approx[i].imag)
        for i in range(n)
    ]
    return summary, samples, bank


def cmd_farrow_bench(cfg: dict):
    bank = FarrowBank.from_text(Path(cfg["bank_in"]).read_text()) if cfg.get("bank_in") else None
    summary, samples, bank = farrow_bench(
        int(cfg["N"]), int(cfg["Ntilde"]), int(cfg["L"]), int(cfg["p"]), int(cfg["alpha"]),
        float(cfg["atten"]), int(cfg["seed"]), bank, int(cfg["count"]),
    )
    extra = {}
    if cfg.get("samples"):
        extra[cfg["samples"]] = (samples, SAMPLE_FIELDS)
    if cfg.get("bank_out"):
        Path(cfg["bank_out"]).write_text(bank.to_text())
    return [summary], BENCH_FIELDS, extra


def theorem1_pairs(pairs: int, seed: int, max_size: int = 4096):
    """Zero-padded radix-2 IFFT resampled onto the N grid versus the direct N-point IDFT."""
    rng = trial_rng(seed, 0)
    kmax = int(math.log2(max_size))
    rows = []
    for i in range(pairs):
        Nt = 1 << int(rng.integers(1, kmax + 1))
        N = int(rng.integers(1, Nt + 1))
        D = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        direct = idft(D).samples
        dt = ifft_pow2(zero_pad_spectrum(D, Nt))
        on_grid = ideal_resample(dt, N, tol=1e-10).samples
        err = float(np.max(np.abs(on_grid - direct)) / np.max(np.abs(direct)))
        rows.append(dict(pair=i, N=N, N_tilde=Nt, max_rel_err=err))
    return rows


def cmd_theorem1(cfg: dict):
    rows = theorem1_pairs(int(cfg["pairs"]), int(cfg["seed"]), int(cfg["max_size"]))
    rows.append(dict(pair="all", N="", N_tilde="", max_rel_err=max(r["max_rel_err"] for r in rows)))
    return rows, THEOREM_FIELDS


def cmd_multiuser(cfg: dict):
    scen_keys = {k: v for k, v in cfg.items() if k not in ("trials", "seed", "config")}
    sc = scenario_from_config(scen_keys) if "cp_user1" in scen_keys else default_two_user_scenario()
    res = run_two_user(sc, int(cfg["trials"]), int(cfg["seed"]))
    rows = list(res.trials)
    rows.append(dict(trial="all", evm_user2_mismatched_db=res.evm_user2_mismatched, evm_user2_common_db=res.evm_user2_common))
    return rows, MULTIUSER_FIELDS


COMMANDS = {
    "plan": cmd_plan,
    "lte-grid": cmd_lte_grid,
    "sweep": cmd_sweep,
    "farrow-bench": cmd_farrow_bench,
    "theorem1": cmd_theorem1,
    "multiuser": cmd_multiuser,
}


# -- argument handling -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptive-cp", description="Adaptive cyclic-prefix OFDM experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML/JSON file with option values")
        p.add_argument("--out", help="output CSV path")
        return p

    p = common(sub.add_parser("plan", help="plan a symbol from delay spread or clock rates"))
    p.add_argument("--T", help="overall symbol time, e.g. 80us")
    p.add_argument("--B", help="bandwidth, e.g. 32MHz")
    p.add_argument("--tau", help="RMS delay spread, e.g. 2.6667us")
    p.add_argument("--mult", type=float, help="CP multiple of tau (default 6)")
    p.add_argument("--M", type=int, help="QAM block length")
    p.add_argument("--clocks", help="file of available DAC clock periods")
    p.add_argument("--Ts", help="base sample period for --clocks")
    p.add_argument("--Ntilde", type=int, help="power-of-two IFFT size for --clocks")
    p.add_argument("--lte-grid", action="store_true", default=None, help="enumerate fixed-grid CP solutions")
    p.add_argument("--subframe", help="subframe duration for --lte-grid")
    p.add_argument("--Td", help="data-portion duration for --lte-grid")

    p = common(sub.add_parser("lte-grid", help="CP lengths that fill a subframe with a fixed data portion"))
    p.add_argument("--subframe")
    p.add_argument("--Td")

    p = common(sub.add_parser("sweep", help="single-user adaptive-CP sweep over delay spreads"))
    p.add_argument("--taus", help="comma-separated delay spreads, e.g. 12.1ns,200.3ns")
    p.add_argument("--B")
    p.add_argument("--T", help="fixed symbol time")
    p.add_argument("--Td", help="fixed data portion (symbol time grows with the CP)")
    p.add_argument("--mult", type=float)
    p.add_argument("--snr", type=float, help="per-sample SNR in dB (omit for noiseless)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--waveform", choices=("dfts_ofdm", "ofdm"))
    p.add_argument("--backend", choices=("direct", "clock_change", "farrow"))
    p.add_argument("--records", help="also write per-symbol link records to this CSV")

    p = common(sub.add_parser("farrow-bench", help="Farrow path versus direct IDFT"))
    p.add_argument("--N", type=int)
    p.add_argument("--Ntilde", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--atten", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, help="samples compared and dumped (default 100)")
    p.add_argument("--samples", help="write the per-sample dump to this CSV")
    p.add_argument("--bank-in", help="load a saved Farrow bank instead of designing one")
    p.add_argument("--bank-out", help="save the Farrow bank used")

    p = common(sub.add_parser("theorem1", help="zero-padded IFFT versus direct IDFT on random sizes"))
    p.add_argument("--pairs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-size", type=int)

    p = common(sub.add_parser("multiuser", help="two-user CP mismatch experiment"))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    return ap


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        cfg.update({k.replace("-", "_"): v for k, v in load_config(path).items()})
    for k, v in vars(args).items():
        if k in ("command", "out", "config") or v is None:
            continue
        cfg[k] = v
    return cfg


def _output_path(args) -> Path | None:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{args.command}.csv"
    return None


def _write(path: Path | None, rows, fields, sidecar: dict) -> None:
    text = table_to_string(rows, fields)
    if path is None:
        sys.stdout.write(text)
        sys.stderr.write(dump_sidecar(sidecar))
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    Path(str(path) + ".config.json").write_text(dump_sidecar(sidecar))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve(args)
        result = COMMANDS[args.command](cfg)
        rows, fields = result[0], result[1]
        extra = result[2] if len(result) > 2 else {}
        sidecar = dict(command=args.command, **cfg)
        _write(_output_path(args), rows, fields, sidecar)
        for path, (xrows, xfields) in sorted(extra.items()):
            with open(path, "w", newline="") as fh:
                write_table(xrows, xfields, fh)
    except (AdaptiveCPError, ValueError, KeyError, OSError) as e:
        msg = str(e) if not isinstance(e, KeyError) else f"missing setting {e}"
        print(f"adaptive-cp {args.command}: error: {msg}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print(f"adaptive-cp {args.command}: internal error: {e!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
