"""Summation and tail-integral primitives.

Running sums are accumulated in extended precision (``np.longdouble``) and
rounded back to float64; ``rounding_slack`` gives the a priori relative
error used to widen certified brackets.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import DivergentTail, UncertifiableTail

UNIT_ROUNDOFF = 2.0 ** -53
_EXT_EPS = float(np.finfo(np.longdouble).eps)

# explicit summation needed before a log-power summand becomes monotone
_MAX_PRE_MONOTONE = 10 ** 7


def cumsum(terms) -> np.ndarray:
    """out[i] = sum(terms[: i + 1]), accumulated in extended precision."""
    return np.cumsum(np.asarray(terms, dtype=np.longdouble)).astype(np.float64)


def rcumsum(terms) -> np.ndarray:
    """out[i] = sum(terms[i:]), accumulated in extended precision."""
    acc = np.cumsum(np.asarray(terms, dtype=np.longdouble)[::-1])[::-1]
    return acc.astype(np.float64)


def rounding_slack(n_terms: int, ops: int = 16) -> float:
    """Relative error bound for a sum of ``n_terms`` non-negative computed terms.

    ``ops`` covers the per-term error of pow/log/multiply (each assumed
    within a few ulps); the second part is the extended-precision
    accumulation error, the last ulp the final rounding to float64.
    """
    return (ops + 1) * UNIT_ROUNDOFF + 1.01 * max(n_terms, 1) * _EXT_EPS


def log_power_term(x, s: float, gamma: float):
    """x^(-s) * (1 + ln x)^gamma, vectorised."""
    x = np.asarray(x, dtype=np.float64)
    out = x ** (-s)
    if gamma != 0.0:
        out = out * (1.0 + np.log(x)) ** gamma
    return out


def series_converges(s: float, gamma: float) -> bool:
    """Does sum_k k^(-s) (1 + ln k)^gamma converge?"""
    return s > 1.0 or (s == 1.0 and gamma < -1.0)


def log_power_integral(s: float, gamma: float, x0: float) -> float:
    """Integral of x^(-s) (1 + ln x)^gamma over [x0, inf), x0 >= 1."""
    if not series_converges(s, gamma):
        return math.inf
    if gamma == 0.0:
        return x0 ** (1.0 - s) / (s - 1.0)
    big_l = 1.0 + math.log(x0)
    if s == 1.0:
        return big_l ** (gamma + 1.0) / (-gamma - 1.0)
    with mpmath.workdps(30):
        val = (mpmath.e ** (s - 1.0) * mpmath.mpf(s - 1.0) ** (-gamma - 1.0)
               * mpmath.gammainc(gamma + 1.0, a=(s - 1.0) * big_l))
        return float(val)


def monotone_from(s: float, gamma: float) -> int:
    """Smallest integer from which x^(-s)(1+ln x)^gamma is non-increasing."""
    if gamma <= 0.0:
        return 1
    if s <= 0.0:
        raise UncertifiableTail("log-power summand is never decreasing")
    return max(1, math.ceil(math.exp(gamma / s - 1.0)))


def certified_log_power_tail(s: float, gamma: float, start: int) -> tuple[float, float]:
    """Bracket sum_{k >= start} k^(-s) (1 + ln k)^gamma.

    Explicit terms are summed until the summand is monotone; the rest is
    enclosed by integral comparison, [I(M), g(M) + I(M)].
    """
    if not series_converges(s, gamma):
        raise DivergentTail(f"sum k^-{s} (1+ln k)^{gamma} diverges")
    m0 = max(start, monotone_from(s, gamma))
    if m0 - start > _MAX_PRE_MONOTONE:
        raise UncertifiableTail("summand becomes monotone too late to certify")
    head = 0.0
    if m0 > start:
        head = math.fsum(log_power_term(np.arange(start, m0, dtype=np.float64), s, gamma))
    integral = log_power_integral(s, gamma, float(m0))
    first = float(log_power_term(float(m0), s, gamma))
    slack = rounding_slack(m0 - start + 1)
    lo = (head + integral) * (1.0 - slack)
    hi = (head + first + integral) * (1.0 + slack)
    return lo, hi
