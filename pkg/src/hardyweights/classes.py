"""Membership tests and certified constant brackets for weight classes.

The supremum over all cut indices n is replaced by a scan n <= N with
certified tails, plus an asymptotic argument for the closed-form
families: for a tail k^alpha (1 + ln k)^gamma the ratio stays bounded iff
the relevant tail series converges with room to spare (exponent > 1).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .errors import (DivergentTail, UncertifiableTail, UnsupportedFamily,
                     VerificationFailure, ZeroCumulativeWeight)
from .operators import PsiWeight
from .sequences import Interval, TruncationPolicy, WeightSequence, weighted_tail_remainder


class Verdict(str, enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMemberEvidence"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ConstantEstimate:
    bracket: Interval
    witness_n: int
    verdict: Verdict
    scanned_up_to: int
    note: str = ""
    trace_lo: np.ndarray | None = field(default=None, repr=False)
    trace_hi: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER

    def to_dict(self, class_name: str, beta: float, p: float) -> dict:
        return {
            "class": class_name,
            "beta": beta,
            "p": p,
            "bracket": self.bracket.to_dict(),
            "verdict": self.verdict.value,
            "witness_n": self.witness_n,
            "scanned_up_to": self.scanned_up_to,
            "note": self.note,
        }

    def trace_rows(self):
        """(n, lo, hi) rows of the per-n ratio scan."""
        if self.trace_lo is None:
            return []
        return [(i + 1, float(lo), float(hi))
                for i, (lo, hi) in enumerate(zip(self.trace_lo, self.trace_hi))]


@dataclass
class DoublingReport:
    holds: bool
    constant: float
    first_failure: int | None = None
    scanned_up_to: int = 0

    def __post_init__(self):
        if self.holds and self.first_failure is not None:
            raise ValueError("a holding report has no failure index")


@dataclass(frozen=True)
class DoublingM:
    m: int
    c: float
    verified_up_to: int


# ----------------------------------------------------------------------
# trend heuristics
# ----------------------------------------------------------------------

def decade_points(N: int, count: int = 4) -> list[int]:
    """Indices N/10^(count-1), ..., N/10, N (deduplicated, >= 1)."""
    pts = sorted({max(1, N // 10 ** j) for j in range(count)})
    return pts


def diverges_across_decades(values, persistence: float = 0.75) -> bool:
    """Heuristic for unbounded growth of a ratio sampled once per decade.

    Every increment must be positive and at least ``persistence`` times
    the previous one: logarithmic or faster growth passes, convergence to
    a limit at rate n^-delta fails once 10^-delta < persistence.
    """
    v = [float(x) for x in values]
    if len(v) < 3:
        return False
    if any(math.isinf(x) for x in v):
        return True
    inc = np.diff(v)
    if np.any(inc <= 0):
        return False
    return bool(np.all(inc[1:] >= persistence * inc[:-1]))


# ----------------------------------------------------------------------
# QB_{beta,p}
# ----------------------------------------------------------------------

def _tail_exponent(model, e: float) -> tuple[float, float]:
    """Series exponent s with sum k^e w(k) ~ sum k^-s (1+ln k)^gamma."""
    alpha, gamma, _ = model
    return -(e + alpha), gamma


def qb_constant(w: WeightSequence, beta: float, p: float,
                policy: TruncationPolicy | None = None) -> ConstantEstimate:
    """Bracket [w]_{QB_{beta,p}}, the least d with
    sum_{k<=n} (k/n)^{beta p} w(k) + sum_{k>=n} (n/k)^p w(k) <= d sum_{k<=n} (k/n)^{beta p} w(k)
    for every n.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if beta < -1:
        raise ValueError("beta must be >= -1")
    policy = policy or TruncationPolicy()
    M = w.natural_horizon(policy.N)
    k = np.arange(1, M + 1, dtype=np.float64)
    wv = w.values_upto(M)
    prefix = nx.cumsum(k ** (beta * p) * wv)
    rev = nx.rcumsum(k ** (-p) * wv)
    slack = nx.rounding_slack(M)

    verdict, note = None, ""
    try:
        rem = weighted_tail_remainder(w, -p, M, policy)
    except DivergentTail as exc:
        verdict, note, rem = Verdict.NON_MEMBER, f"divergent tail: {exc}", None
    except UncertifiableTail as exc:
        verdict, note, rem = Verdict.INCONCLUSIVE, f"uncertified tail: {exc}", None

    scale = k ** (p + beta * p)
    rem_lo = 0.0 if rem is None else rem.lo
    rem_hi = math.inf if rem is None else rem.hi
    num_lo = scale * (rev * (1 - slack) + rem_lo)
    num_hi = scale * (rev * (1 + slack) + rem_hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_lo = 1.0 + num_lo / (prefix * (1 + slack))
        r_hi = 1.0 + num_hi / (prefix * (1 - slack))
    empty = prefix == 0.0
    # 0 <= d * 0 holds for every d when both sides vanish
    r_lo[empty & (num_lo == 0)] = 1.0
    r_hi[empty & (num_hi == 0)] = 1.0
    r_lo[empty & (num_lo > 0)] = math.inf
    r_hi[empty & (num_hi > 0)] = math.inf

    witness = int(np.argmax(r_lo)) + 1
    lo = float(r_lo[witness - 1])
    hi = float(np.max(r_hi))

    if verdict is None:
        if math.isinf(lo):
            verdict, note = Verdict.NON_MEMBER, f"prefix sum vanishes at n={witness} while the tail does not"
        elif w.support_end is not None:
            verdict, note = Verdict.MEMBER, "finite support: scan is exhaustive"
        else:
            s, gamma = _tail_exponent(w.tail_model, -p)
            if s > 1.0:
                verdict = Verdict.MEMBER
                e = w.tail_model[0] + beta * p + 1.0
                limit = 1.0 + e / (s - 1.0) if e > 0 else 1.0
                if limit > hi:
                    hi = limit * (1 + slack)
                    note = "upper end set by the asymptotic ratio"
            else:
                # s == 1 with gamma < -1: ratio grows like ln n
                verdict = Verdict.NON_MEMBER
                hi = math.inf
                note = "logarithmically growing ratio (boundary exponent)"
    if verdict is not Verdict.MEMBER:
        hi = math.inf
    return ConstantEstimate(Interval(lo, hi), witness, verdict, M, note, r_lo, r_hi)


def b_constant(w: WeightSequence, p: float,
               policy: TruncationPolicy | None = None) -> ConstantEstimate:
    """B_p constant: the beta = 0 member of the QB family."""
    return qb_constant(w, 0.0, p, policy)


def equivalence_transform(w: WeightSequence, beta: float, p: float) -> WeightSequence:
    """The weight k -> k^{beta p} w(k); QB_{beta,p} membership of w equals
    B_{(beta+1)p} membership of the result."""
    e = beta * p
    if w.kind == "power":
        return WeightSequence.power(w.alpha + e)
    if w.kind == "powerlog":
        return WeightSequence.powerlog(w.alpha + e, w.gamma)
    if w.kind == "explicit":
        k = np.arange(1, len(w.values) + 1, dtype=np.float64)
        tail = None if w.tail_alpha is None else w.tail_alpha + e
        return WeightSequence.explicit(k ** e * np.asarray(w.values), tail_alpha=tail)
    raise UnsupportedFamily(w.kind)


# ----------------------------------------------------------------------
# generalized psi condition
# ----------------------------------------------------------------------

def generalized_psi_condition(v: WeightSequence, psi: PsiWeight, beta: float, p: float,
                              policy: TruncationPolicy | None = None) -> ConstantEstimate:
    """Bracket the least C with
    (sum_{k<=n} k^beta psi(k))^p sum_{k>=n} Psi(k)^-p v(k) <= C sum_{k<=n} k^{beta p} v(k)
    for every n.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    policy = policy or TruncationPolicy()
    M = max(v.natural_horizon(policy.N), psi.seq.natural_horizon(policy.N))
    k = np.arange(1, M + 1, dtype=np.float64)
    Psi = psi.cumulative_upto(M)
    if np.any(Psi <= 0):
        raise ZeroCumulativeWeight(f"Psi({int(np.argmax(Psi <= 0)) + 1}) = 0")
    vv = v.values_upto(M)
    S = nx.cumsum(k ** beta * psi.values_upto(M))
    D = nx.cumsum(k ** (beta * p) * vv)
    rev = nx.rcumsum(Psi ** (-p) * vv)
    slack = nx.rounding_slack(M)

    verdict, note, rem = None, "", None
    s = gamma = None
    if v.support_end is not None and v.support_end <= M:
        rem = Interval(0.0, 0.0)
    else:
        try:
            g, th_lo, th_hi = psi.growth(M)
            R = weighted_tail_remainder(v, -g * p, M, policy)
            rem = Interval(th_hi ** (-p) * R.lo, th_lo ** (-p) * R.hi)
            s, gamma = _tail_exponent(v.tail_model, -g * p)
        except DivergentTail as exc:
            verdict, note = Verdict.NON_MEMBER, f"divergent tail: {exc}"
        except UncertifiableTail as exc:
            verdict, note = Verdict.INCONCLUSIVE, f"uncertified tail: {exc}"

    Sp = S ** p
    num_lo = Sp * (rev * (1 - slack) + (0.0 if rem is None else rem.lo))
    num_hi = Sp * (rev * (1 + slack) + (math.inf if rem is None else rem.hi))
    with np.errstate(divide="ignore", invalid="ignore"):
        c_lo = num_lo / (D * (1 + slack))
        c_hi = num_hi / (D * (1 - slack))
    empty = D == 0.0
    c_lo[empty & (num_lo == 0)] = 0.0
    c_hi[empty & (num_hi == 0)] = 0.0
    c_lo[empty & (num_lo > 0)] = math.inf
    c_hi[empty & (num_hi > 0)] = math.inf
    c_lo *= 1 - slack
    c_hi *= 1 + slack

    witness = int(np.argmax(c_lo)) + 1
    lo = float(c_lo[witness - 1])
    hi = float(np.max(c_hi))
    if verdict is None:
        if math.isinf(lo):
            verdict, note = Verdict.NON_MEMBER, f"right side vanishes at n={witness}"
        elif s is None:
            verdict, note = Verdict.MEMBER, "finite support: scan is exhaustive"
        elif s > 1.0:
            verdict = Verdict.MEMBER
        else:
            pts = decade_points(min(M, policy.N))
            if diverges_across_decades(c_lo[np.array(pts) - 1]):
                verdict, note = Verdict.NON_MEMBER, "ratio grows across the last decades"
            else:
                verdict, note = Verdict.INCONCLUSIVE, "boundary exponent; no asymptotic bound"
    if verdict is not Verdict.MEMBER:
        hi = math.inf
    return ConstantEstimate(Interval(lo, hi), witness, verdict, M, note, c_lo, c_hi)


# ----------------------------------------------------------------------
# doubling conditions
# ----------------------------------------------------------------------

def _block_sums(psi: PsiWeight, N: int, m: int) -> np.ndarray:
    """sum_{k=n}^{m n} psi(k) for n = 1..N, picking the cancellation-free route."""
    top = m * N
    Psi = psi.cumulative_upto(top)
    rev = nx.rcumsum(psi.values_upto(top))
    n = np.arange(1, N + 1)
    Psi_before = np.concatenate([[0.0], Psi])[n - 1]
    forward = Psi[m * n - 1] - Psi_before
    rev_after = np.concatenate([rev, [0.0]])[m * n]
    backward = rev[n - 1] - rev_after
    use_forward = Psi_before <= 0.5 * Psi[m * n - 1]
    return np.where(use_forward, forward, backward)


def _failure_report(ratio: np.ndarray, N: int) -> DoublingReport | None:
    bad = ~np.isfinite(ratio)
    if np.any(bad):
        return DoublingReport(False, math.inf, int(np.argmax(bad)) + 1, N)
    pts = decade_points(N)
    if diverges_across_decades(ratio[np.array(pts) - 1]):
        return DoublingReport(False, math.inf, pts[0], N)
    return None


def check_doubling_2n(psi: PsiWeight, N: int) -> DoublingReport:
    """Smallest c with sum_{k<=n} psi(k) <= c sum_{k=n}^{2n} psi(k) for n <= N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    Psi = psi.cumulative_upto(N)
    block = _block_sums(psi, N, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Psi == 0, 0.0, Psi / block)
    fail = _failure_report(ratio, N)
    if fail:
        return fail
    return DoublingReport(True, float(np.max(ratio)) * (1 + nx.rounding_slack(2 * N)), None, N)


def check_weighted_doubling(psi: PsiWeight, beta: float, N: int) -> DoublingReport:
    """Smallest C with n^beta sum_{k<=n} psi(k) <= C sum_{k<=n} k^beta psi(k) for n <= N."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    k = np.arange(1, N + 1, dtype=np.float64)
    Psi = psi.cumulative_upto(N)
    weighted = nx.cumsum(k ** beta * psi.values_upto(N))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Psi == 0, 0.0, k ** beta * Psi / weighted)
    fail = _failure_report(ratio, N)
    if fail:
        return fail
    C = float(np.max(ratio))
    if beta > 0:
        C *= 1 + nx.rounding_slack(N)
    return DoublingReport(True, C, None, N)


def weighted_doubling_bound(c: float, beta: float, m: int = 2) -> float:
    """Constant (2m)^beta c + m^beta produced from an m-dilation doubling
    constant c; m = 2 gives 4^beta c + 2^beta."""
    return (2.0 * m) ** beta * c + float(m) ** beta


def find_doubling_m(psi: PsiWeight, beta: float, N: int, C: float | None = None) -> DoublingM:
    """Smallest m with C < m^beta, the constant c = m^beta (C-1)/(m^beta - C),
    and a scan confirming sum_{k<=n} psi <= c sum_{k=n}^{mn} psi for n <= N/m."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if beta == 0:
        rep = check_doubling_2n(psi, N // 2 or 1)
        if not rep.holds:
            raise VerificationFailure("dilation-2 doubling fails", rep.first_failure)
        return DoublingM(2, rep.constant, N // 2 or 1)
    if C is None:
        rep = check_weighted_doubling(psi, beta, N)
        if not rep.holds:
            raise VerificationFailure("weighted doubling fails", rep.first_failure)
        C = rep.constant
    m = max(2, int(math.floor(C ** (1.0 / beta))))
    while m ** beta <= C:
        m += 1
    mb = float(m) ** beta
    c = mb * (C - 1.0) / (mb - C)
    n_max = max(1, N // m)
    Psi = psi.cumulative_upto(n_max)
    block = _block_sums(psi, n_max, m)
    tol = 1 + nx.rounding_slack(m * n_max)
    bad = np.nonzero(Psi > c * block * tol)[0]
    if bad.size:
        raise VerificationFailure(
            f"sum_(k<=n) psi > {c:g} sum_(n<=k<=mn) psi at n={bad[0] + 1}", int(bad[0]) + 1)
    return DoublingM(m, c, n_max)
