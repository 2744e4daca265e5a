"""Individual randomness tests, each returning p-values.

Bit-level tests (monobit, runs, serial) follow the NIST SP 800-22
definitions; birthday spacings and the 32x32 binary rank test follow
Marsaglia's Diehard descriptions.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .numerics import chisq_pvalue, erfc, igamc, poisson_midp
from .stream import InsufficientData


class EmptyStream(ValueError):
    pass


class TupleTooLarge(ValueError):
    pass


class ShortStreamWarning(UserWarning):
    pass


def _bits(bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint8)
    if b.size == 0:
        raise EmptyStream("no bits to test")
    return b


def monobit(bits, n: int | None = None) -> float:
    """Frequency test: p = erfc(|#1 - #0| / sqrt(2n))."""
    b = _bits(bits)
    if n is not None:
        b = b[:n]
    n = b.size
    if n < 100:
        warnings.warn(f"monobit on only {n} bits", ShortStreamWarning, stacklevel=2)
    s = abs(2 * int(np.count_nonzero(b)) - n) / math.sqrt(n)
    return erfc(s / math.sqrt(2))


def runs_test(bits) -> float:
    """Runs test; p = 0 when the frequency prerequisite fails."""
    b = _bits(bits)
    n = b.size
    pi = np.count_nonzero(b) / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return 0.0
    v = 1 + int(np.count_nonzero(b[1:] != b[:-1]))
    return erfc(abs(v - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi)))


def serial_counts(bits, m: int) -> np.ndarray:
    """Counts of every overlapping m-bit pattern, the sequence wrapped around."""
    b = _bits(bits).astype(np.int64)
    n = b.size
    if m <= 0:
        return np.array([n], dtype=np.int64)
    ext = np.concatenate([b, b[: m - 1]]) if m > 1 else b
    while ext.size < n + m - 1:  # m - 1 > n: keep wrapping
        ext = np.concatenate([ext, b])
    vals = np.zeros(n, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[j : j + n]
    return np.bincount(vals, minlength=1 << m)


def psi_squared(bits, m: int) -> float:
    if m <= 0:
        return 0.0
    n = len(bits)
    counts = serial_counts(bits, m).astype(float)
    return (2.0**m / n) * float(np.dot(counts, counts)) - n


def serial_test(bits, m: int, check_size: bool = True) -> tuple[float, float]:
    """Generalised serial test; returns the two p-values for tuple size ``m``."""
    b = _bits(bits)
    n = b.size
    if m < 2:
        raise ValueError("serial test needs m >= 2")
    if check_size and 2**m > n / 5:
        raise TupleTooLarge(f"2**{m} exceeds n/5 for n={n}")
    p0, p1, p2 = psi_squared(b, m), psi_squared(b, m - 1), psi_squared(b, m - 2)
    d1 = p0 - p1
    d2 = p0 - 2 * p1 + p2
    return (
        igamc(2 ** (m - 2), max(d1, 0.0) / 2),
        igamc(2 ** (m - 3), max(d2, 0.0) / 2),
    )


def birthday_duplicates(words: np.ndarray, nms: int = 512, nbits: int = 24) -> np.ndarray:
    """Duplicate-spacing count for each consecutive group of ``nms`` words."""
    w = np.asarray(words, dtype=np.uint32)
    k = w.size // nms
    if k == 0:
        raise InsufficientData(f"birthday spacings needs at least {nms} words")
    days = np.sort((w[: k * nms] >> np.uint32(32 - nbits)).reshape(k, nms).astype(np.int64), axis=1)
    spacings = np.diff(days, axis=1, prepend=0)
    spacings.sort(axis=1)
    return np.count_nonzero(spacings[:, 1:] == spacings[:, :-1], axis=1)


def birthday_lambda(nms: int = 512, nbits: int = 24) -> float:
    return nms**3 / 2.0 ** (nbits + 2)


def birthday_pvalue(words: np.ndarray, nms: int = 512, nbits: int = 24) -> float:
    """One p-sample: total duplicates over all groups against Poisson(groups * lambda)."""
    dups = birthday_duplicates(words, nms, nbits)
    return poisson_midp(int(dups.sum()), dups.size * birthday_lambda(nms, nbits))


def gf2_rank(rows: np.ndarray, ncols: int) -> np.ndarray:
    """Rank over GF(2) of a batch of matrices given as integer row bitmasks.

    ``rows`` has shape ``(batch, nrows)``; elimination runs column by column
    across the whole batch at once.
    """
    m = np.array(rows, dtype=np.uint64, copy=True)
    if m.ndim == 1:
        m = m[None, :]
    batch, nrows = m.shape
    used = np.zeros((batch, nrows), dtype=bool)
    rank = np.zeros(batch, dtype=np.int64)
    idx = np.arange(batch)
    for col in range(ncols - 1, -1, -1):
        bit = np.uint64(1 << col)
        has = ((m & bit) != 0) & ~used
        found = has.any(axis=1)
        if not found.any():
            continue
        piv = np.argmax(has, axis=1)
        b = idx[found]
        p = piv[found]
        prow = m[b, p]
        used[b, p] = True
        rank[found] += 1
        hit = (m[b] & bit) != 0
        hit[np.arange(b.size), p] = False
        m[b] ^= np.where(hit, prow[:, None], np.uint64(0))
    return rank


def rank_probability(r: int, rows: int = 32, cols: int = 32) -> float:
    """Probability that a random ``rows x cols`` GF(2) matrix has rank ``r``."""
    if r < 0 or r > min(rows, cols):
        return 0.0
    log2p = r * (rows + cols - r) - rows * cols
    prod = 1.0
    for i in range(r):
        prod *= (1 - 2.0 ** (i - rows)) * (1 - 2.0 ** (i - cols)) / (1 - 2.0 ** (i - r))
    return math.ldexp(prod, log2p)


def binary_rank_32(words: np.ndarray, matrices: int | None = None) -> float:
    """32x32 rank test: chi-square over ranks {32, 31, <=30} with 2 dof."""
    w = np.asarray(words, dtype=np.uint32)
    k = w.size // 32 if matrices is None else matrices
    if k < 1 or w.size < 32 * k:
        raise InsufficientData(f"rank test needs {32 * max(k, 1)} words, got {w.size}")
    ranks = gf2_rank(w[: 32 * k].reshape(k, 32), 32)
    observed = np.array(
        [np.count_nonzero(ranks == 32), np.count_nonzero(ranks == 31), np.count_nonzero(ranks <= 30)],
        dtype=float,
    )
    p32, p31 = rank_probability(32), rank_probability(31)
    expected = k * np.array([p32, p31, 1.0 - p32 - p31])
    chisq = float(np.sum((observed - expected) ** 2 / expected))
    return chisq_pvalue(chisq, 2)
