"""Sequence representations, quasi-monotonicity, and certified sums.

A weight is one of three closed forms:

* ``power``      w(k) = k^alpha
* ``powerlog``   w(k) = k^alpha (1 + ln k)^gamma
* ``explicit``   finite list of values, zero beyond its end unless a
  power tail ``k^tail_alpha`` is attached.

Every infinite sum is returned as an :class:`Interval` that encloses the
exact value: explicit summation to a horizon plus an integral-comparison
bracket for the remainder.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _numerics as nx
from .errors import DivergentTail, UncertifiableTail, UnsupportedFamily


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.hi)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def rel_width(self) -> float:
        return self.width / abs(self.mid) if self.mid else math.inf

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def scale(self, c: float) -> "Interval":
        """Multiply by a non-negative scalar."""
        if c < 0:
            raise ValueError("scale factor must be non-negative")
        return Interval(self.lo * c, self.hi * c)

    def widen(self, rel: float) -> "Interval":
        return Interval(self.lo * (1.0 - rel), self.hi * (1.0 + rel))

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


class TailMode(str, enum.Enum):
    CERTIFIED_INTEGRAL = "certified"
    NONE = "none"


@dataclass(frozen=True)
class TruncationPolicy:
    """How an infinite sum is cut: horizon, remainder treatment, tolerance."""

    N: int = 10 ** 5
    tail_mode: TailMode = TailMode.CERTIFIED_INTEGRAL
    rel_tol: float = 1e-12

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("horizon N must be a positive integer")
        if not 0.0 <= self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in [0, 1)")
        object.__setattr__(self, "tail_mode", TailMode(self.tail_mode))

    def with_horizon(self, N: int) -> "TruncationPolicy":
        return TruncationPolicy(int(N), self.tail_mode, self.rel_tol)


@dataclass(frozen=True)
class WeightSequence:
    """A non-negative sequence indexed from 1."""

    kind: str
    alpha: float = 0.0
    gamma: float = 0.0
    values: tuple = ()
    tail_alpha: float | None = None
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("power", "powerlog", "explicit"):
            raise UnsupportedFamily(f"unknown family {self.kind!r}")
        if self.kind == "explicit":
            vals = tuple(float(v) for v in self.values)
            if any(not math.isfinite(v) or v < 0 for v in vals):
                raise ValueError("explicit weights must be finite and non-negative")
            object.__setattr__(self, "values", vals)
        if not self.description:
            object.__setattr__(self, "description", self.spec_string())

    # constructors -----------------------------------------------------
    @classmethod
    def power(cls, alpha: float) -> "WeightSequence":
        return cls("power", alpha=float(alpha))

    @classmethod
    def powerlog(cls, alpha: float, gamma: float) -> "WeightSequence":
        return cls("powerlog", alpha=float(alpha), gamma=float(gamma))

    @classmethod
    def explicit(cls, values: Sequence[float], tail_alpha: float | None = None,
                 description: str = "") -> "WeightSequence":
        tail = None if tail_alpha is None else float(tail_alpha)
        return cls("explicit", values=tuple(values), tail_alpha=tail,
                   description=description)

    @classmethod
    def truncated_power(cls, alpha: float, n: int) -> "WeightSequence":
        """k^alpha for k <= n, zero beyond."""
        k = np.arange(1, n + 1, dtype=np.float64)
        return cls.explicit(k ** alpha, description=f"power:alpha={alpha}|k<={n}")

    # evaluation -------------------------------------------------------
    def values_upto(self, N: int) -> np.ndarray:
        """Array of w(1), ..., w(N)."""
        k = np.arange(1, N + 1, dtype=np.float64)
        if self.kind == "power":
            return k ** self.alpha
        if self.kind == "powerlog":
            return k ** self.alpha * (1.0 + np.log(k)) ** self.gamma
        out = np.zeros(N)
        L = min(N, len(self.values))
        out[:L] = self.values[:L]
        if self.tail_alpha is not None and N > len(self.values):
            out[len(self.values):] = k[len(self.values):] ** self.tail_alpha
        return out

    def __call__(self, k: int) -> float:
        if k < 1:
            raise IndexError("weights are indexed from 1")
        return float(self.values_upto(k)[-1])

    @property
    def support_end(self) -> int | None:
        """Last possibly non-zero index, or None for an infinite tail."""
        if self.kind == "explicit" and self.tail_alpha is None:
            return len(self.values)
        return None

    @property
    def tail_model(self) -> tuple[float, float, int] | None:
        """(alpha, gamma, first index) of the closed-form tail, if any."""
        if self.kind == "power":
            return self.alpha, 0.0, 1
        if self.kind == "powerlog":
            return self.alpha, self.gamma, 1
        if self.tail_alpha is not None:
            return self.tail_alpha, 0.0, len(self.values) + 1
        return None

    def natural_horizon(self, N: int) -> int:
        """Summation horizon: the support end for finite data, else N
        extended so explicit values are never cut off."""
        if self.support_end is not None:
            return max(self.support_end, 1)
        if self.kind == "explicit":
            return max(N, len(self.values))
        return N

    def spec_string(self) -> str:
        if self.kind == "power":
            return f"power:alpha={self.alpha:g}"
        if self.kind == "powerlog":
            return f"powerlog:alpha={self.alpha:g},gamma={self.gamma:g}"
        tail = "" if self.tail_alpha is None else f",tail={self.tail_alpha:g}"
        return f"explicit:len={len(self.values)}{tail}"


@dataclass(frozen=True)
class QuasiSequence:
    """A sequence y with k^(-beta) y(k) non-increasing."""

    beta: float
    source: WeightSequence

    def __post_init__(self):
        if self.beta < -1:
            raise ValueError("beta must be >= -1")

    def values_upto(self, N: int) -> np.ndarray:
        return self.source.values_upto(N)


# ----------------------------------------------------------------------
# mini-language
# ----------------------------------------------------------------------

def _parse_kv(body: str) -> dict[str, str]:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def read_values_file(path: str | Path) -> list[float]:
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vals.append(float(line))
    return vals


def parse_weight(text: str) -> WeightSequence:
    """Parse ``power:alpha=<r>``, ``powerlog:alpha=<r>,gamma=<r>`` or
    ``explicit:file=<path>[,tail=<alpha>]``."""
    name, _, body = text.partition(":")
    kv = _parse_kv(body)
    try:
        if name == "power":
            return WeightSequence.power(float(kv["alpha"]))
        if name == "powerlog":
            return WeightSequence.powerlog(float(kv["alpha"]), float(kv["gamma"]))
        if name == "explicit":
            tail = kv.get("tail")
            return WeightSequence.explicit(
                read_values_file(kv["file"]),
                tail_alpha=None if tail is None else float(tail),
                description=text)
    except KeyError as exc:
        raise ValueError(f"{text!r}: missing parameter {exc.args[0]}") from None
    raise ValueError(f"unknown weight family {name!r}")


# ----------------------------------------------------------------------
# sums
# ----------------------------------------------------------------------

def prefix_weighted_sum(w: WeightSequence, n: int, e: float) -> float:
    """sum_{k=1}^n k^e w(k), correctly rounded from the computed terms."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=np.float64)
    return math.fsum(k ** e * w.values_upto(n))


def weighted_tail_remainder(w: WeightSequence, e: float, M: int,
                            policy: TruncationPolicy | None = None) -> Interval:
    """Enclose sum_{k > M} k^e w(k).

    Raises DivergentTail when the closed-form tail diverges, and
    UncertifiableTail when ``policy.tail_mode`` is NONE and the partial
    sums have not settled.
    """
    policy = policy or TruncationPolicy()
    model = w.tail_model
    # finite explicit data beyond M
    head = 0.0
    if w.kind == "explicit" and len(w.values) > M:
        k = np.arange(M + 1, len(w.values) + 1, dtype=np.float64)
        head = math.fsum(k ** e * np.asarray(w.values[M:]))
    if model is None:
        return Interval(head, head)
    alpha, gamma, first = model
    s = -(e + alpha)
    if not nx.series_converges(s, gamma):
        raise DivergentTail(f"sum k^{e} w(k) diverges for {w.description}")
    start = max(M + 1, first)
    if policy.tail_mode is TailMode.NONE:
        return head + _settled_remainder(s, gamma, start, policy.rel_tol)
    lo, hi = nx.certified_log_power_tail(s, gamma, start)
    return Interval(head + lo, head + hi)


def _settled_remainder(s: float, gamma: float, start: int, rel_tol: float) -> Interval:
    # heuristic: the block [start, 2 start) must be negligible against the block before it
    block = nx.log_power_term(np.arange(start, 2 * start, dtype=np.float64), s, gamma)
    before = nx.log_power_term(np.arange(1, start, dtype=np.float64), s, gamma)
    b, total = math.fsum(block), math.fsum(before)
    if total == 0.0 or b > rel_tol * total:
        raise UncertifiableTail("partial sums have not stabilised within rel_tol")
    return Interval(b, b * (1.0 + rel_tol) + rel_tol * total)


def tail_power_sum(w: WeightSequence, n: int, p: float,
                   policy: TruncationPolicy | None = None) -> Interval:
    """Enclose sum_{k=n}^inf (n/k)^p w(k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    policy = policy or TruncationPolicy()
    M = max(policy.N, n)
    k = np.arange(n, M + 1, dtype=np.float64)
    terms = (n / k) ** p * w.values_upto(M)[n - 1:]
    explicit = math.fsum(terms)
    rem = weighted_tail_remainder(w, -p, M, policy).scale(float(n) ** p)
    slack = nx.rounding_slack(len(terms))
    return Interval(explicit * (1 - slack) + rem.lo, explicit * (1 + slack) + rem.hi)


def is_quasi_nonincreasing(y, beta: float, N: int,
                           rel_tol: float = 1e-12) -> tuple[bool, int | None]:
    """Check that k^(-beta) y(k) is non-increasing for 1 <= k <= N.

    ``y`` is an array of values y(1), ... (at least N of them), a callable,
    or a sequence object with ``values_upto``. Returns (ok, first k with
    k^-beta y(k) < (k+1)^-beta y(k+1)).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if hasattr(y, "values_upto"):
        vals = y.values_upto(N)
    elif callable(y):
        vals = np.array([y(k) for k in range(1, N + 1)], dtype=np.float64)
    else:
        vals = np.asarray(y, dtype=np.float64)[:N]
        if len(vals) < N:
            vals = np.concatenate([vals, np.zeros(N - len(vals))])
    k = np.arange(1, N + 1, dtype=np.float64)
    z = k ** (-beta) * vals
    bad = np.nonzero(z[1:] > z[:-1] * (1.0 + rel_tol))[0]
    if bad.size:
        return False, int(bad[0]) + 1
    return True, None
