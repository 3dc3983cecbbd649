"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Both implementations are
imported directly so the comparison does not depend on the import-time
selection.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from adaptive_cp import _pykernels
from adaptive_cp.resampler import RationalRatio, design_lowpass
from adaptive_cp.transceiver import design_farrow_bank

try:
    from adaptive_cp import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    x = rng.standard_normal(1543) + 1j * rng.standard_normal(1543)
    yield "dft_direct N=1543", lambda k: k.dft_direct(x, 1)

    proto = design_lowpass(241, 4, 60, passband_edge=0.1, stopband_edge=0.15)
    xp = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    yield "polyphase 4/3, 5000 out", lambda k: k.polyphase(xp, proto.taps, 4, 3, 0, 5000)

    bank = design_farrow_bank(1543, 2048)
    ratio = RationalRatio.for_sizes(bank.p, 2048, 1543)
    xf = rng.standard_normal(2048 + 64) + 1j * rng.standard_normal(2048 + 64)
    denom = ratio.p * ratio.q_den
    yield "farrow (231, 9, 4), 1543 out", lambda k: k.farrow(xf, bank.coeffs, 30 * denom, ratio.q_num, denom, 1543)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    impls = [("python", _pykernels)] + ([("compiled", _ckernels)] if _ckernels else [])
    print(f"{'kernel':32s}" + "".join(f"{name:>14s}" for name, _ in impls) + ("   speedup" if _ckernels else ""))
    for label, fn in cases(rng):
        times = []
        for _, k in impls:
            number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(k), number=1), 1e-6)))
            best = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat)) / number
            times.append(best)
        line = f"{label:32s}" + "".join(f"{t * 1e3:11.3f} ms" for t in times)
        if _ckernels:
            line += f"   {times[0] / times[1]:7.1f}x"
        print(line)
    if _ckernels is None:
        print("compiled kernels not built; reinstall with Cython available")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
