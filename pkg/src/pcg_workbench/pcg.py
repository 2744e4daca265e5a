"""PCG32 (XSH-RR) golden model, RTL datapath builder and a RANDU negative control.

The generator keeps a 64-bit LCG state and emits a 32-bit permutation of the
state *before* each update::

    xorshifted = ((state ^ (state >> 18)) >> 27) & 0xFFFFFFFF
    rot        = state >> 59
    output     = rotr32(xorshifted, rot)
    state      = state * multiplier + increment   (mod 2**64)

Seeding loads ``state`` directly from ``seed``; there is no stream-selection
warm-up.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .rtl_core import Expr, RtlDesign, Signal, validate

U64 = 0xFFFFFFFFFFFFFFFF
U32 = 0xFFFFFFFF

DEFAULT_MULTIPLIER = 0x5851F42D4C957F2D
DEFAULT_INCREMENT = 0x14057B7EF767814F
RANDU_MULTIPLIER = 65539


@dataclass(frozen=True)
class PcgConfig:
    seed: int = 0
    multiplier: int = DEFAULT_MULTIPLIER
    increment: int = DEFAULT_INCREMENT


class ConfigWarning(enum.Enum):
    EVEN_INCREMENT = "EvenIncrement"
    EVEN_MULTIPLIER = "EvenMultiplier"
    ZERO_MULTIPLIER = "ZeroMultiplier"


def validate_config(config: PcgConfig) -> list[ConfigWarning]:
    """Flag parameter choices that shorten the period. Values are never altered."""
    warnings = []
    if config.multiplier & U64 == 0:
        warnings.append(ConfigWarning.ZERO_MULTIPLIER)
    if config.multiplier % 2 == 0:
        warnings.append(ConfigWarning.EVEN_MULTIPLIER)
    if config.increment % 2 == 0:
        warnings.append(ConfigWarning.EVEN_INCREMENT)
    return warnings


def permute(state: int) -> int:
    xorshifted = ((state ^ (state >> 18)) >> 27) & U32
    rot = state >> 59
    return ((xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))) & U32


def golden_next(state: int, multiplier: int, increment: int) -> tuple[int, int]:
    """Return ``(new_state, output)``; the output permutes the pre-update state."""
    return (state * multiplier + increment) & U64, permute(state)


@dataclass
class PcgGolden:
    config: PcgConfig = field(default_factory=PcgConfig)
    state: int = field(init=False)

    def __post_init__(self):
        self.state = self.config.seed & U64

    def next(self) -> int:
        self.state, out = golden_next(self.state, self.config.multiplier, self.config.increment)
        return out


def _affine_block(multiplier: int, increment: int, n: int):
    """Coefficients with state_k = a[k] * state_0 + c[k] (mod 2**64), k < n."""
    a = np.empty(n, dtype=np.uint64)
    c = np.empty(n, dtype=np.uint64)
    ak, ck = 1, 0
    for k in range(n):
        a[k], c[k] = ak, ck
        ak = (ak * multiplier) & U64
        ck = (ck * multiplier + increment) & U64
    return a, c, ak, ck


def _permute_array(states: np.ndarray) -> np.ndarray:
    xorshifted = (((states >> np.uint64(18)) ^ states) >> np.uint64(27)).astype(np.uint32)
    rot = (states >> np.uint64(59)).astype(np.uint32)
    return (xorshifted >> rot) | (xorshifted << ((np.uint32(32) - rot) & np.uint32(31)))


def golden_blocks(config: PcgConfig, n: int | None, block: int = 1 << 16):
    """Yield the golden output stream as ``uint32`` arrays of at most ``block`` words.

    ``n=None`` streams forever.  Within a block every state is an affine
    function of the block's first state, so a block costs a few vector ops.
    """
    if n is not None:
        block = max(1, min(block, n))
    a, c, a_step, c_step = _affine_block(config.multiplier & U64, config.increment & U64, block)
    state = config.seed & U64
    done = 0
    while n is None or done < n:
        k = block if n is None else min(block, n - done)
        states = a[:k] * np.uint64(state) + c[:k]
        yield _permute_array(states)
        state = (a_step * state + c_step) & U64
        done += k


def golden_stream(config: PcgConfig, n: int) -> np.ndarray:
    """``n`` outputs starting from ``state = seed`` as a ``uint32`` array."""
    if n <= 0:
        return np.zeros(0, dtype=np.uint32)
    return np.concatenate(list(golden_blocks(config, n)))


def golden_stream_scalar(config: PcgConfig, n: int) -> list[int]:
    """Straight-line loop over :func:`golden_next`; the slow but obvious route."""
    g = PcgGolden(config)
    return [g.next() for _ in range(n)]


def randu_stream(seed: int, n: int) -> np.ndarray:
    """RANDU, x <- 65539 x mod 2**31; returns x_1..x_n zero-extended to 32 bits."""
    out = np.empty(n, dtype=np.uint32)
    x = seed & 0x7FFFFFFF
    for k in range(n):
        x = (x * RANDU_MULTIPLIER) & 0x7FFFFFFF
        out[k] = x
    return out


# --------------------------------------------------------------------------
# RTL


def pcg_datapath(state: Signal, multiplier: Expr | Signal, increment: Expr | Signal):
    """Next-state and output expressions for a PCG of any state width >= 8.

    For a 64-bit state this is exactly PCG32 XSH-RR.  Narrower states keep
    the same structure scaled down (used for exhaustive desk checks).
    """
    w = state.width
    next_state = state * multiplier + increment
    if w == 64:
        xorshifted = ((state ^ (state >> 18)) >> 27).trunc(32)
        rot = (state >> 59).trunc(5)
        return next_state, xorshifted.rotr(rot)
    # scaled-down variant: output half the width, rotate by the top bits
    out_w = w // 2
    rot_bits = max(1, (out_w - 1).bit_length())
    xorshifted = ((state ^ (state >> (w // 4))) >> (w - out_w - rot_bits)).trunc(out_w)
    rot = (state >> (w - rot_bits)).trunc(rot_bits)
    return next_state, xorshifted.rotr(rot)


def build_pcg_rtl(config: PcgConfig = PcgConfig(), state_width: int = 64) -> RtlDesign:
    """Free-running PCG datapath with the named signals seed/state/multiplier/increment/output."""
    d = RtlDesign("pcg")
    w = state_width
    d.wire("seed", config.seed & ((1 << w) - 1), w)
    mult = d.wire("multiplier", config.multiplier & ((1 << w) - 1), w)
    inc = d.wire("increment", config.increment & ((1 << w) - 1), w)
    state = d.add_signal("state", w)
    next_state, out = pcg_datapath(state, mult, inc)
    d.add_register(state, next_state, reset_value=config.seed & ((1 << w) - 1))
    output = d.add_output("output", out.width)
    d.assign_comb(output, out)
    return validate(d)
