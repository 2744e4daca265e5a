"""Golden PCG32 model: scalar stepping, the vectorized stream and RANDU."""

from pcg_workbench.pcg import (
    PcgConfig,
    PcgGolden,
    golden_stream,
    golden_stream_scalar,
    permute,
    randu_stream,
    validate_config,
)

cfg = PcgConfig(seed=42)
print("default multiplier 0x%016X, increment 0x%016X" % (cfg.multiplier, cfg.increment))

# The output is computed from the state before it advances, so the first
# word is just the permutation of the seed.
gen = PcgGolden(cfg)
first = [gen.next() for _ in range(4)]
print("first words:", " ".join(f"{w:08X}" for w in first))
assert first[0] == permute(42)

# The numpy path jumps ahead in blocks and must agree with the scalar loop.
fast = golden_stream(cfg, 10_000)
slow = golden_stream_scalar(cfg, 10_000)
assert list(fast) == slow
print("vectorized and scalar streams agree over", len(slow), "words")

# A configuration with an even increment or multiplier is accepted, with warnings.
print("warnings for mult=1, inc=0:", [w.name for w in validate_config(PcgConfig(0, 1, 0))])

print("RANDU from seed 1:", randu_stream(1, 5).tolist())
