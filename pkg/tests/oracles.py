"""Slow, obviously-correct reference implementations used only by tests."""
from __future__ import annotations

import numpy as np


def brute_dft(x, sign=-1):
    """Matrix DFT, no normalization; exponent indices reduced exactly in integers."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    nk = np.outer(k, k) % n
    return np.exp(sign * 2j * np.pi * nk / n) @ x


def brute_circular_convolve(h, d):
    """Double loop over integer-valued inputs."""
    n = len(d)
    out = [0] * n
    for i in range(n):
        acc = 0
        for j, hv in enumerate(h):
            acc += hv * d[(i - j) % n]
        out[i] = acc
    return out


def naive_resample(x, h, p, q, offset, n_out):
    """Zero-stuff by p, filter with h, keep every q-th sample starting at offset."""
    x = np.asarray(x, dtype=np.complex128)
    up = np.zeros(x.size * p, dtype=np.complex128)
    up[::p] = x
    y = np.convolve(up, np.asarray(h, dtype=np.float64))
    idx = offset + q * np.arange(n_out)
    out = np.zeros(n_out, dtype=np.complex128)
    ok = idx < y.size
    out[ok] = y[idx[ok]]
    return out


def linear_convolve(h, x):
    return np.convolve(np.asarray(x, dtype=np.complex128), np.asarray(h, dtype=np.complex128))
