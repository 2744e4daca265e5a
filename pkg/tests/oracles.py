"""Reference implementations used only as test oracles.

Each one is written independently of the package code: different data
representation, no shared helpers, favouring obviousness over speed.
"""

from __future__ import annotations

import ctypes
import itertools


def ref_pcg32_step(state: int, multiplier: int, increment: int) -> tuple[int, int]:
    """One step of the PCG32 reference routine, using C fixed-width integers."""
    old = ctypes.c_uint64(state)
    new = ctypes.c_uint64(old.value * multiplier + increment)
    xorshifted = ctypes.c_uint32(((old.value >> 18) ^ old.value) >> 27).value
    rot = ctypes.c_uint32(old.value >> 59).value
    out = ctypes.c_uint32((xorshifted >> rot) | (xorshifted << ((-rot) & 31))).value
    return new.value, out


def ref_pcg32_seeded(initstate: int, initseq: int, n: int) -> list[int]:
    """Outputs after the reference seeding routine (srandom with stream selection)."""
    mult = 6364136223846793005
    inc = ctypes.c_uint64((initseq << 1) | 1).value
    state, _ = ref_pcg32_step(0, mult, inc)
    state = ctypes.c_uint64(state + initstate).value
    state, _ = ref_pcg32_step(state, mult, inc)
    out = []
    for _ in range(n):
        state, x = ref_pcg32_step(state, mult, inc)
        out.append(x)
    return out


def brute_serial_counts(bits: list[int], m: int) -> dict[str, int]:
    """Overlapping m-tuple counts by string slicing of the wrapped sequence."""
    s = "".join(str(b) for b in bits)
    n = len(s)
    ext = s * (m // n + 2)
    counts = {"".join(t): 0 for t in itertools.product("01", repeat=m)}
    for i in range(n):
        counts[ext[i : i + m]] += 1
    return counts


def span_rank(rows: list[int]) -> int:
    """GF(2) rank as log2 of the number of distinct subset XORs."""
    span = {0}
    for r in rows:
        span |= {x ^ r for x in span}
    return len(span).bit_length() - 1


def bits_from_string(s: str) -> list[int]:
    return [int(c) for c in s]
