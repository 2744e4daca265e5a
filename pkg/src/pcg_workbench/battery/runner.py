from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import ks_uniform
from .randtests import binary_rank_32, birthday_pvalue, monobit, runs_test, serial_test
from .report import DEFAULT_POLICY, AssessmentPolicy, TestResult
from .stream import InsufficientData, WordStream, bits_of

log = logging.getLogger(__name__)

TESTS = ("monobit", "runs", "serial", "birthdays", "rank32")


@dataclass
class BatterySizes:
    """Per-test sample sizes. Defaults run in seconds; dieharder's are larger."""

    tsamples: int = 100_000  # bits per p-sample for monobit/runs/serial
    psamples: int = 20
    serial_m: Sequence[int] = field(default_factory=lambda: (2, 4, 8))
    birthday_tsamples: int = 100  # experiments of nms birthdays per p-sample
    nms: int = 512
    nbits: int = 24
    rank_matrices: int = 1000  # 32x32 matrices per p-sample

    def words_needed(self, tests: Sequence[str] = TESTS) -> int:
        bitwords = -(-self.tsamples // 32) * self.psamples
        per = {
            "monobit": bitwords,
            "runs": bitwords,
            "serial": bitwords * len(self.serial_m),
            "birthdays": self.birthday_tsamples * self.nms * self.psamples,
            "rank32": 32 * self.rank_matrices * self.psamples,
        }
        return sum(per[t] for t in tests)


def _bit_samples(stream: WordStream, sizes: BatterySizes):
    nwords = -(-sizes.tsamples // 32)
    for _ in range(sizes.psamples):
        yield bits_of(stream.take(nwords))[: sizes.tsamples]


def _run_one(name: str, stream: WordStream, sizes: BatterySizes, policy) -> list[TestResult]:
    ps, ts = sizes.psamples, sizes.tsamples
    if name == "monobit":
        p = [monobit(b) for b in _bit_samples(stream, sizes)]
        return [TestResult.make("sts_monobit", 1, ts, ps, ks_uniform(p), policy)]
    if name == "runs":
        p = [runs_test(b) for b in _bit_samples(stream, sizes)]
        return [TestResult.make("sts_runs", 2, ts, ps, ks_uniform(p), policy)]
    if name == "serial":
        rows = []
        for m in sizes.serial_m:
            pairs = [serial_test(b, m) for b in _bit_samples(stream, sizes)]
            for k in (0, 1):
                p = ks_uniform([pp[k] for pp in pairs])
                rows.append(TestResult.make("sts_serial", m, ts, ps, p, policy))
        return rows
    if name == "birthdays":
        n = sizes.birthday_tsamples * sizes.nms
        p = [birthday_pvalue(stream.take(n), sizes.nms, sizes.nbits) for _ in range(ps)]
        return [
            TestResult.make("diehard_birthdays", 0, sizes.birthday_tsamples, ps, ks_uniform(p), policy)
        ]
    if name == "rank32":
        n = 32 * sizes.rank_matrices
        p = [binary_rank_32(stream.take(n), sizes.rank_matrices) for _ in range(ps)]
        return [TestResult.make("diehard_rank_32x32", 0, sizes.rank_matrices, ps, ks_uniform(p), policy)]
    raise ValueError(f"unknown test {name!r}; choose from {', '.join(TESTS)}")


def run_battery(
    stream: WordStream | np.ndarray,
    tests: Sequence[str] = TESTS,
    sizes: BatterySizes | None = None,
    policy: AssessmentPolicy = DEFAULT_POLICY,
    on_skip: Callable[[str, Exception], None] | None = None,
) -> list[TestResult]:
    """Run the selected tests in order, each drawing fresh words from ``stream``.

    A test that runs out of input is skipped (reported through ``on_skip``,
    logged by default) and the remaining tests still run.
    """
    if not isinstance(stream, WordStream):
        stream = WordStream.from_array(stream)
    sizes = sizes or BatterySizes()
    for t in tests:
        if t not in TESTS:
            raise ValueError(f"unknown test {t!r}; choose from {', '.join(TESTS)}")
    results: list[TestResult] = []
    for t in tests:
        try:
            results.extend(_run_one(t, stream, sizes, policy))
        except InsufficientData as exc:
            if on_skip is not None:
                on_skip(t, exc)
            else:
                log.warning("skipping %s: %s", t, exc)
    return results
