"""Special functions behind the battery's p-values.

``igamc`` follows the classic series / continued-fraction split (series for
``x < a + 1``, modified Lentz continued fraction otherwise).  ``erfc`` is
the standard library's.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

erfc = math.erfc

_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 10_000


class DomainError(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def igamc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0 or x < 0 or math.isnan(x):
        raise DomainError(f"igamc undefined for a={a}, x={x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_cf(a, x))


def igam(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0 or x < 0:
        raise DomainError(f"igam undefined for a={a}, x={x}")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_cf(a, x))


def chisq_pvalue(x: float, dof: float) -> float:
    """Upper-tail probability of a chi-square statistic."""
    if x < 0 or dof < 1 or math.isnan(x):
        raise DomainError(f"chi-square p-value needs x >= 0 and dof >= 1, got ({x}, {dof})")
    return igamc(dof / 2.0, x / 2.0)


def poisson_midp(k: int, mean: float) -> float:
    """Mid-p upper tail P(X > k) + P(X = k)/2 for X ~ Poisson(mean)."""
    if k < 0:
        return 1.0
    # P(X <= k) = Q(k + 1, mean), so P(X > k) = P(k + 1, mean)
    point = igamc(k + 1, mean) - (igamc(k, mean) if k > 0 else 0.0)
    return min(1.0, max(0.0, igam(k + 1, mean) + 0.5 * point))


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the limiting Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # theta-function form converges fast for small arguments
        y = math.exp(-(math.pi**2) / (8 * lam * lam))
        s = sum(y ** ((2 * j - 1) ** 2) for j in range(1, 8))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    total = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += term if j % 2 else -term
        if term < 1e-300:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(pvalues: Iterable[float]) -> tuple[float, int]:
    p = np.sort(np.asarray(list(pvalues), dtype=float))
    n = p.size
    if n == 0:
        raise EmptyInput("ks_uniform needs at least one p-value")
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - p)), float(np.max(p - (i - 1) / n)))
    return d, n


def ks_uniform(pvalues: Iterable[float]) -> float:
    """Two-sided Kolmogorov-Smirnov test of p-values against U(0, 1)."""
    d, n = ks_statistic(pvalues)
    if n == 1:
        # exact: D = max(u, 1 - u), so P(D >= d) = 2 (1 - d)
        return min(1.0, 2.0 * (1.0 - d))
    rn = math.sqrt(n)
    return kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)
