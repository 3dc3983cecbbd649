"""Pure numpy implementations of the hot loops.

Same signatures and results as the compiled ``_ckernels`` module; used when
the extension is not built or ``ADAPTIVE_CP_PURE_PYTHON`` is set.
"""
import numpy as np

_DFT_BLOCK = 1 << 20  # max gathered twiddles per block


def twiddles(n, sign):
    m = np.arange(n, dtype=np.float64)
    ang = 2.0 * np.pi * m / n
    return np.cos(ang) + sign * 1j * np.sin(ang)


def dft_direct(x, sign):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    n = x.shape[0]
    w = twiddles(n, sign)
    out = np.empty(n, dtype=np.complex128)
    idx_n = np.arange(n, dtype=np.int64)
    rows = max(1, _DFT_BLOCK // max(n, 1))
    for k0 in range(0, n, rows):
        k = np.arange(k0, min(n, k0 + rows), dtype=np.int64)
        idx = np.outer(k, idx_n) % n
        out[k0:k0 + len(k)] = w[idx] @ x
    return out


def polyphase(x, h, p, q, offset, n_out):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    h = np.ascontiguousarray(h, dtype=np.float64)
    L = h.shape[0]
    rows = -(-L // p)
    hp = np.zeros(rows * p)
    hp[:L] = h
    arms = hp.reshape(rows, p).T  # arms[i, r] = h[r*p + i]
    j = offset + np.arange(n_out, dtype=np.int64) * q
    base = j // p
    arm = j % p
    idx = base[:, None] - np.arange(rows)[None, :]
    valid = (idx >= 0) & (idx < x.shape[0])
    xs = np.where(valid, x[np.clip(idx, 0, max(x.shape[0] - 1, 0))], 0)
    return (arms[arm] * xs).sum(axis=1)


def farrow(x, coeffs, phase0, step, denom, n_out):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    rows, ncoef = coeffs.shape
    phase = phase0 + np.arange(n_out, dtype=np.int64) * step
    base = phase // denom
    mu = (phase % denom) / denom
    poly = np.zeros((n_out, rows))
    for c in range(ncoef - 1, -1, -1):
        poly = poly * mu[:, None] + coeffs[:, c][None, :]
    idx = base[:, None] - np.arange(rows)[None, :]
    valid = (idx >= 0) & (idx < x.shape[0])
    xs = np.where(valid, x[np.clip(idx, 0, max(x.shape[0] - 1, 0))], 0)
    return (poly * xs).sum(axis=1)
