"""Dieharder-style assessments and the results table."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable


class Assessment(str, enum.Enum):
    PASSED = "PASSED"
    WEAK = "WEAK"
    FAILED = "FAILED"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AssessmentPolicy:
    """Two-sided thresholds; dieharder's defaults."""

    weak: float = 0.005
    fail: float = 1e-6

    def __post_init__(self):
        if not 0 < self.fail < self.weak < 0.5:
            raise ValueError(f"need 0 < fail < weak < 0.5, got fail={self.fail}, weak={self.weak}")


DEFAULT_POLICY = AssessmentPolicy()


def assess(p: float, policy: AssessmentPolicy = DEFAULT_POLICY) -> Assessment:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value out of range: {p}")
    if p < policy.fail or p > 1.0 - policy.fail:
        return Assessment.FAILED
    if p < policy.weak or p > 1.0 - policy.weak:
        return Assessment.WEAK
    return Assessment.PASSED


@dataclass(frozen=True)
class TestResult:
    test_name: str
    ntup: int
    tsamples: int
    psamples: int
    pvalue: float
    assessment: Assessment

    __test__ = False  # not a pytest class

    @classmethod
    def make(cls, name, ntup, tsamples, psamples, pvalue, policy=DEFAULT_POLICY) -> "TestResult":
        return cls(name, ntup, tsamples, psamples, pvalue, assess(pvalue, policy))


HEADER = "test_name |ntup| tsamples |psamples| p-value |Assessment"


def format_report(results: Iterable[TestResult]) -> str:
    lines = [f"{'':>10}{HEADER}"]
    for r in results:
        lines.append(
            f"{r.test_name:>20}|{r.ntup:4d}|{r.tsamples:10d}|{r.psamples:8d}|"
            f"{r.pvalue:10.8f}|{r.assessment.value:>10}"
        )
    return "\n".join(lines) + "\n"


def format_tsv(results: Iterable[TestResult]) -> str:
    return "".join(
        f"{r.test_name}\t{r.ntup}\t{r.tsamples}\t{r.psamples}\t{r.pvalue:.8f}\t{r.assessment.value}\n"
        for r in results
    )
