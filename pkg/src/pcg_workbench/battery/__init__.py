"""Dieharder-style statistical battery over 32-bit word streams."""

from .numerics import chisq_pvalue, igamc, ks_uniform
from .randtests import (
    EmptyStream,
    TupleTooLarge,
    binary_rank_32,
    birthday_pvalue,
    gf2_rank,
    monobit,
    rank_probability,
    runs_test,
    serial_counts,
    serial_test,
)
from .report import Assessment, AssessmentPolicy, TestResult, assess, format_report, format_tsv
from .runner import TESTS, BatterySizes, run_battery
from .stream import InsufficientData, WordStream, bits_of, read_words, write_words

__all__ = [
    "Assessment",
    "AssessmentPolicy",
    "BatterySizes",
    "EmptyStream",
    "InsufficientData",
    "TESTS",
    "TestResult",
    "TupleTooLarge",
    "WordStream",
    "assess",
    "binary_rank_32",
    "birthday_pvalue",
    "bits_of",
    "chisq_pvalue",
    "format_report",
    "format_tsv",
    "gf2_rank",
    "igamc",
    "ks_uniform",
    "monobit",
    "rank_probability",
    "read_words",
    "run_battery",
    "runs_test",
    "serial_counts",
    "serial_test",
    "write_words",
]
