"""Discrete Hardy averaging operators and the smoothing operator T."""
from __future__ import annotations

import math
import threading
from typing import Callable

import numpy as np

from . import _numerics as nx
from .errors import UncertifiableTail, ZeroCumulativeWeight
from .sequences import Interval, QuasiSequence, TruncationPolicy, WeightSequence


class PsiWeight:
    """A non-negative sequence psi with memoised cumulative sums Psi(k)."""

    def __init__(self, seq: WeightSequence):
        self.seq = seq
        self._cum = np.zeros(0)
        self._lock = threading.Lock()

    def __repr__(self):
        return f"PsiWeight({self.seq.description})"

    def __eq__(self, other):
        return isinstance(other, PsiWeight) and other.seq == self.seq

    def __hash__(self):
        return hash(("psi", self.seq))

    @classmethod
    def power(cls, a: float) -> "PsiWeight":
        return cls(WeightSequence.power(a))

    @classmethod
    def ones(cls) -> "PsiWeight":
        return cls.power(0.0)

    def values_upto(self, N: int) -> np.ndarray:
        return self.seq.values_upto(N)

    def cumulative_upto(self, N: int) -> np.ndarray:
        """Psi(1), ..., Psi(N) as a read-only view of the cached table."""
        if len(self._cum) < N:
            with self._lock:
                if len(self._cum) < N:
                    size = max(N, 2 * len(self._cum))
                    table = nx.cumsum(self.seq.values_upto(size))
                    table.flags.writeable = False
                    self._cum = table
        return self._cum[:N]

    def growth(self, M: int) -> tuple[float, float, float]:
        """(g, lo, hi) with lo * k^g <= Psi(k) <= hi * k^g for every k > M.

        Available when psi is k^a (a > -1, or a < -1) from M on, or has
        finite support within M.
        """
        PsiM = float(self.cumulative_upto(M)[-1])
        if PsiM <= 0.0:
            raise ZeroCumulativeWeight(f"Psi({M}) = 0")
        end = self.seq.support_end
        if end is not None and end <= M:
            return 0.0, PsiM, PsiM
        model = self.seq.tail_model
        if model is None or model[1] != 0.0 or model[2] > M + 1:
            raise UncertifiableTail(f"no growth bound for Psi of {self.seq.description}")
        a = model[0]
        if a < -1.0:
            # Psi increases to a finite limit
            extra = (M + 0.0) ** (a + 1.0) / (-a - 1.0)
            return 0.0, PsiM, PsiM * (1 + nx.UNIT_ROUNDOFF * 8) + extra
        if a == -1.0:
            raise UncertifiableTail("Psi grows logarithmically; no power bound")
        g = a + 1.0
        Mf = float(M)
        if a >= 0.0:
            c_lo = PsiM - Mf ** g / g
            lo = 1.0 / g + min(c_lo, 0.0) / (Mf + 1.0) ** g
            c_hi = PsiM - (Mf + 1.0) ** g / g
            hi = max(c_hi, 0.0) / (Mf + 1.0) ** g + (1.0 + 1.0 / (Mf + 1.0)) ** g / g
        else:
            c_lo = PsiM - (Mf + 1.0) ** g / g
            lo = 1.0 / g + min(c_lo, 0.0) / (Mf + 1.0) ** g
            c_hi = PsiM - Mf ** g / g
            hi = 1.0 / g + max(c_hi, 0.0) / (Mf + 1.0) ** g
        slack = nx.rounding_slack(M)
        lo *= 1.0 - slack
        hi *= 1.0 + slack
        if lo <= 0.0:
            raise UncertifiableTail("growth lower bound is not positive; raise the horizon")
        return g, lo, hi


def _as_array(y, N: int) -> np.ndarray:
    if hasattr(y, "values_upto"):
        return y.values_upto(N)
    if callable(y):
        return np.array([y(k) for k in range(1, N + 1)], dtype=np.float64)
    arr = np.asarray(y, dtype=np.float64)[:N]
    if len(arr) < N:
        arr = np.concatenate([arr, np.zeros(N - len(arr))])
    return arr


def hardy_average(y, n: int) -> float:
    """(A y)(n) = (1/n) sum_{k<=n} y(k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.fsum(_as_array(y, n)) / n


def psi_cumulative(psi: PsiWeight, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(psi.cumulative_upto(n)[-1])


def generalized_hardy_average(psi: PsiWeight, y, n: int) -> float:
    """(A_psi y)(n) = sum_{k<=n} y(k) psi(k) / Psi(n)."""
    Psi_n = psi_cumulative(psi, n)
    if Psi_n == 0.0:
        raise ZeroCumulativeWeight(f"Psi({n}) = 0")
    return math.fsum(_as_array(y, n) * psi.values_upto(n)) / Psi_n


def hardy_average_all(y, N: int) -> np.ndarray:
    """(A y)(n) for n = 1..N."""
    return nx.cumsum(_as_array(y, N)) / np.arange(1, N + 1)


def generalized_hardy_average_all(psi: PsiWeight, y, N: int) -> np.ndarray:
    """(A_psi y)(n) for n = 1..N."""
    Psi = psi.cumulative_upto(N)
    if np.any(Psi <= 0):
        first = int(np.argmax(Psi <= 0)) + 1
        raise ZeroCumulativeWeight(f"Psi({first}) = 0")
    return nx.cumsum(_as_array(y, N) * psi.values_upto(N)) / Psi


def smoothing_operator_T(f: Callable, p: float, beta: float, n: int,
                         policy: TruncationPolicy | None = None,
                         growth: tuple[float, float] | None = None) -> Interval:
    """Enclose T f(n) = n^a sum_{k>=n} k^(-a-1) f(k), a = p + beta p.

    ``f`` maps an integer array of indices to non-negative values.
    ``growth=(A, g)`` declares 0 <= f(k) <= A k^g for every k beyond the
    horizon; without it, or when the majorant diverges, the tail cannot be
    certified. If f is also non-decreasing its value at the horizon gives
    the lower bound of the remainder.
    """
    policy = policy or TruncationPolicy()
    a = p + beta * p
    if a <= 0:
        raise ValueError("p + beta p must be positive")
    if growth is None:
        raise UncertifiableTail("smoothing operator needs a declared growth bound for f")
    A, g = growth
    s = a + 1.0 - g
    if s <= 1.0:
        raise UncertifiableTail(f"majorant k^{g - a - 1:g} is not summable")
    M = max(policy.N, n)
    k = np.arange(n, M + 1)
    fk = np.asarray(f(k), dtype=np.float64)
    kf = k.astype(np.float64)
    head = math.fsum(kf ** (-a - 1.0) * fk)
    tail_hi = A * nx.certified_log_power_tail(s, 0.0, M + 1)[1]
    fM = float(fk[-1])
    # non-decreasing f: f(k) >= f(M) beyond the horizon
    tail_lo = fM * nx.certified_log_power_tail(a + 1.0, 0.0, M + 1)[0] if _nondecreasing(fk) else 0.0
    slack = nx.rounding_slack(len(k))
    scale = float(n) ** a
    return Interval(scale * (head * (1 - slack) + tail_lo),
                    scale * (head * (1 + slack) + tail_hi))


def _nondecreasing(arr: np.ndarray) -> bool:
    return bool(np.all(np.diff(arr) >= 0))


def iterate_T(values: np.ndarray, a: float, m: int) -> np.ndarray:
    """Apply T m times to f(1..N), treating f as zero beyond N.

    T f(n) = n^a sum_{n<=k<=N} k^(-a-1) f(k); one reverse cumulative sum
    per application.
    """
    k = np.arange(1, len(values) + 1, dtype=np.float64)
    out = np.asarray(values, dtype=np.float64)
    for _ in range(m):
        out = k ** a * nx.rcumsum(k ** (-a - 1.0) * out)
    return out


def log_kernel_sum(values: np.ndarray, a: float, m: int, n: int) -> float:
    """n^a sum_{n<=k<=N} ln(k/n)^m / m! k^(-a-1) f(k)."""
    N = len(values)
    k = np.arange(n, N + 1, dtype=np.float64)
    ker = np.log(k / n) ** m / math.factorial(m)
    return float(n) ** a * math.fsum(ker * k ** (-a - 1.0) * np.asarray(values)[n - 1:])

