"""Two-sided numerical check of the weighted Hardy inequality on Q_beta.

Lower bounds for the best constant come from the truncated-power
extremizers y(k) = k^beta (k <= n); upper bounds from the explicit
constants of the sufficiency argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .classes import (ConstantEstimate, Verdict, check_doubling_2n, decade_points,
                      diverges_across_decades, generalized_psi_condition,
                      weighted_doubling_bound)
from .errors import (DivergentTail, InvalidRegime, NotQuasiMonotone, UncertifiableTail,
                     ZeroCumulativeWeight, ZeroDenominator)
from .operators import PsiWeight
from .sequences import (Interval, QuasiSequence, TruncationPolicy, WeightSequence,
                        is_quasi_nonincreasing, weighted_tail_remainder)


@dataclass
class RatioReport:
    lhs: float
    rhs: float
    ratio: float
    horizon: int
    per_n_trace: np.ndarray | None = field(default=None, repr=False)
    lhs_tail: Interval | None = None
    rhs_tail: Interval | None = None

    def __post_init__(self):
        if self.lhs < 0 or self.rhs < 0:
            raise ValueError("both sides of the inequality are non-negative")

    @property
    def dominant_truncation(self) -> str | None:
        """Which side the truncation error affects more, when certified."""
        if self.lhs_tail is None or self.rhs_tail is None:
            return None
        rel_l = self.lhs_tail.hi / self.lhs if self.lhs else math.inf
        rel_r = self.rhs_tail.hi / self.rhs if self.rhs else math.inf
        return "lhs" if rel_l >= rel_r else "rhs"

    def to_dict(self) -> dict:
        out = {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "horizon": self.horizon}
        if self.lhs_tail is not None:
            out["lhs_tail"] = self.lhs_tail.to_dict()
        if self.rhs_tail is not None:
            out["rhs_tail"] = self.rhs_tail.to_dict()
        out["dominant_truncation"] = self.dominant_truncation
        return out


def extremal_truncated_power(beta: float, n: int) -> QuasiSequence:
    """y(k) = k^beta for k <= n, 0 beyond; a member of Q_beta."""
    if beta < 0 or n < 1:
        raise ValueError("need beta >= 0 and n >= 1")
    return QuasiSequence(beta, WeightSequence.truncated_power(beta, n))


def verify_hardy_inequality(psi: PsiWeight, y: QuasiSequence, v: WeightSequence, p: float,
                            policy: TruncationPolicy | None = None) -> RatioReport:
    """Truncated sides of sum (A_psi y)^p v <= C sum y^p v and their ratio."""
    if p <= 0:
        raise ValueError("p must be positive")
    policy = policy or TruncationPolicy()
    N = policy.N
    ok, bad = is_quasi_nonincreasing(y, y.beta, max(N, 2))
    if not ok:
        raise NotQuasiMonotone(f"k^-beta y(k) increases at k={bad}")
    Psi = psi.cumulative_upto(N)
    if np.any(Psi <= 0):
        raise ZeroCumulativeWeight(f"Psi({int(np.argmax(Psi <= 0)) + 1}) = 0")
    yv = y.values_upto(N)
    vv = v.values_upto(N)
    Y = nx.cumsum(yv * psi.values_upto(N))
    lhs_terms = (Y / Psi) ** p * vv
    rhs_terms = yv ** p * vv
    lhs_cum = nx.cumsum(lhs_terms)
    rhs_cum = nx.cumsum(rhs_terms)
    lhs, rhs = float(lhs_cum[-1]), float(rhs_cum[-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        trace = np.where(rhs_cum > 0, lhs_cum / rhs_cum, np.where(lhs_cum > 0, math.inf, np.nan))
    if rhs == 0.0:
        if lhs == 0.0:
            raise ZeroDenominator("both sides vanish at this horizon")
        ratio = math.inf
    else:
        ratio = lhs / rhs

    lhs_tail = rhs_tail = None
    end = y.source.support_end
    if end is not None and end <= N:
        rhs_tail = Interval(0.0, 0.0)
        try:
            g, lo, hi = psi.growth(N)
            R = weighted_tail_remainder(v, -g * p, N, policy)
            Yp = float(Y[-1]) ** p
            lhs_tail = Interval(Yp * hi ** (-p) * R.lo, Yp * lo ** (-p) * R.hi)
        except Exception:  # tail not certifiable: leave it unreported
            lhs_tail = None
    return RatioReport(lhs, rhs, ratio, N, trace, lhs_tail, rhs_tail)


def extremizer_ratios(psi: PsiWeight, v: WeightSequence, beta: float, p: float,
                      N: int, policy: TruncationPolicy | None = None,
                      with_tail: bool = True) -> np.ndarray:
    """LHS/RHS for every extremizer y_n, n = 1..N.

    For m <= n the average of y_n at m does not depend on n, so every
    ratio comes from two running sums. With ``with_tail`` the part of the
    left side beyond N, S(n)^p sum_{m>N} Psi(m)^-p v(m), is added through
    its certified lower bound (inf when it diverges), so each entry stays a
    lower bound for the true ratio of y_n.
    """
    k = np.arange(1, N + 1, dtype=np.float64)
    Psi = psi.cumulative_upto(N)
    if np.any(Psi <= 0):
        raise ZeroCumulativeWeight(f"Psi({int(np.argmax(Psi <= 0)) + 1}) = 0")
    vv = v.values_upto(N)
    S = nx.cumsum(k ** beta * psi.values_upto(N))
    head = nx.cumsum((S / Psi) ** p * vv)
    after = np.concatenate([nx.rcumsum(Psi ** (-p) * vv)[1:], [0.0]])
    if with_tail:
        after = after + _psi_tail_lower(psi, v, p, N, policy or TruncationPolicy(N))
    lhs = head + S ** p * after
    rhs = nx.cumsum(k ** (beta * p) * vv)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, math.inf, 0.0))
    return r


def _psi_tail_lower(psi: PsiWeight, v: WeightSequence, p: float, N: int,
                    policy: TruncationPolicy) -> float:
    """Certified lower bound for sum_{m>N} Psi(m)^-p v(m); 0 if not certifiable."""
    end = v.support_end
    if end is not None and end <= N:
        return 0.0
    try:
        g, _, hi = psi.growth(N)
        R = weighted_tail_remainder(v, -g * p, N, policy)
    except DivergentTail:
        return math.inf
    except UncertifiableTail:
        return 0.0
    return hi ** (-p) * R.lo


def lower_bound_constant(psi: PsiWeight, v: WeightSequence, beta: float, p: float,
                         policy: TruncationPolicy | None = None) -> ConstantEstimate:
    """Certified lower bound for the best constant: sup over the extremizer scan.

    The upper end of the bracket is left open; verdict is NonMemberEvidence
    when the ratios diverge across the last decades, Inconclusive otherwise.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    policy = policy or TruncationPolicy()
    N = policy.N
    r = extremizer_ratios(psi, v, beta, p, N, policy) * (1 - nx.rounding_slack(N))
    witness = int(np.argmax(r)) + 1
    lo = float(r[witness - 1])
    pts = np.array(decade_points(N)) - 1
    if math.isinf(lo) or diverges_across_decades(r[pts]):
        verdict, note = Verdict.NON_MEMBER, "extremizer ratios grow without bound"
    else:
        verdict, note = Verdict.INCONCLUSIVE, "lower bound only"
    return ConstantEstimate(Interval(lo, math.inf), witness, verdict, N, note, r, None)


@dataclass(frozen=True)
class UpperBound:
    raw: float        # C1 (p > 1) or C2 (0 < p <= 1)
    absorbed: float   # constant in the final inequality
    regime: str
    doubling_factor: float

    def __float__(self):
        return self.absorbed

    def to_dict(self) -> dict:
        return {"raw": self.raw, "absorbed": self.absorbed, "regime": self.regime,
                "doubling_factor": self.doubling_factor}


def upper_bound_constant(doubling_c: float, condition_C: float, beta: float, p: float,
                         m: int = 2) -> UpperBound:
    """Constants of the sufficiency argument.

    K = (2m)^beta c + m^beta (K = 4^beta c + 2^beta for m = 2);
    p > 1:  C1 = C p K^(p-1), and LHS <= C1 LHS^(1/p') RHS^(1/p) gives LHS <= C1^p RHS;
    p <= 1: C2 = C K^(1-p).
    """
    if p <= 0:
        raise InvalidRegime("p must be positive")
    K = weighted_doubling_bound(doubling_c, beta, m)
    if p > 1:
        c1 = condition_C * p * K ** (p - 1.0)
        return UpperBound(c1, c1 ** p, "p>1", K)
    c2 = condition_C * K ** (1.0 - p)
    return UpperBound(c2, c2, "p<=1", K)


@dataclass
class SandwichReport:
    lower: ConstantEstimate
    condition: ConstantEstimate
    doubling_c: float
    upper: UpperBound | None

    @property
    def holds(self) -> bool | None:
        if self.upper is None:
            return None
        return self.lower.bracket.lo <= self.upper.absorbed

    def to_dict(self, beta: float, p: float) -> dict:
        return {
            "beta": beta,
            "p": p,
            "lower_bound": self.lower.bracket.lo,
            "lower_witness_n": self.lower.witness_n,
            "condition": self.condition.to_dict("psi-condition", beta, p),
            "doubling_c": self.doubling_c,
            "upper_bound": None if self.upper is None else self.upper.to_dict(),
            "sandwich_holds": self.holds,
        }


def hardy_sandwich(psi: PsiWeight, v: WeightSequence, beta: float, p: float,
                   policy: TruncationPolicy | None = None,
                   doubling_c: float | None = None) -> SandwichReport:
    """Lower bound, psi-condition bracket and absorbed upper bound together."""
    policy = policy or TruncationPolicy()
    lower = lower_bound_constant(psi, v, beta, p, policy)
    cond = generalized_psi_condition(v, psi, beta, p, policy)
    if doubling_c is None:
        rep = check_doubling_2n(psi, policy.N)
        doubling_c = rep.constant if rep.holds else math.inf
    upper = None
    if cond.is_member and math.isfinite(doubling_c):
        upper = upper_bound_constant(doubling_c, cond.bracket.hi, beta, p)
    return SandwichReport(lower, cond, doubling_c, upper)
