"""Compensated summation helpers for long oscillatory sums."""

from __future__ import annotations

import math

import numpy as np

_BLOCK = 128


def fsum_complex(values) -> complex:
    """Correctly rounded sum of a complex array (real and imaginary parts separately)."""
    values = np.asarray(values)
    if not np.iscomplexobj(values):
        return complex(math.fsum(values.tolist()))
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def _neumaier_complex(totals: np.ndarray) -> np.ndarray:
    re = _neumaier_real(totals.real)
    im = _neumaier_real(totals.imag)
    return re + 1j * im


def _neumaier_real(totals: np.ndarray) -> np.ndarray:
    out = np.empty(len(totals) + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i, x in enumerate(totals.tolist()):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i + 1] = s + c
    return out


def compensated_cumsum(values) -> np.ndarray:
    """Prefix sums with a leading zero, ``out[k] = sum(values[:k])``.

    Summation runs in blocks of 128: plain cumulative sums inside a block,
    Neumaier-compensated running totals across blocks. The absolute error
    of any prefix is then of order ``128 * eps * max|partial sum|`` instead
    of growing with the full length.
    """
    values = np.asarray(values)
    n = len(values)
    dtype = np.complex128 if np.iscomplexobj(values) else np.float64
    out = np.zeros(n + 1, dtype=dtype)
    if n == 0:
        return out
    nblocks = -(-n // _BLOCK)
    padded = np.zeros(nblocks * _BLOCK, dtype=dtype)
    padded[:n] = values
    blocks = padded.reshape(nblocks, _BLOCK)
    inner = np.cumsum(blocks, axis=1)
    totals = inner[:, -1].copy()
    if dtype == np.complex128:
        offsets = _neumaier_complex(totals)[:-1]
    else:
        offsets = _neumaier_real(totals)[:-1]
    out[1:] = (inner + offsets[:, None]).reshape(-1)[:n]
    return out
