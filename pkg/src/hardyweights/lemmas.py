"""Checkers for the auxiliary inequalities.

Each checker returns the lower bound, the exact (or certified) middle
quantity and the upper bound, so a property test can assert the
sandwich directly. Comparisons allow a 4-ulp relative slack.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from . import _numerics as nx
from .errors import (BadRange, ConvergentSum, OutOfRange, PreconditionFailed,
                     UncertifiableTail, ZeroPartialSum)
from .operators import PsiWeight
from .sequences import Interval, TruncationPolicy, WeightSequence

ULP = 2.0 ** -52
SLACK_ULPS = 4


def le(a: float, b: float, ulps: int = SLACK_ULPS) -> bool:
    """a <= b up to ``ulps`` units in the last place of the larger magnitude."""
    return a <= b + ulps * ULP * max(abs(a), abs(b))


@dataclass
class SandwichResult:
    lower: float
    middle: float
    upper: float
    holds: bool = field(init=False)
    note: str = ""
    middle_bracket: Interval | None = None

    def __post_init__(self):
        if self.middle_bracket is None:
            self.holds = le(self.lower, self.middle) and le(self.middle, self.upper)
        else:
            # an enclosed middle: the sandwich holds unless the enclosure refutes it
            self.holds = (le(self.lower, self.middle_bracket.hi)
                          and le(self.middle_bracket.lo, self.upper))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.lower, self.middle, self.upper

    def to_dict(self) -> dict:
        out = {"lower": self.lower, "middle": self.middle, "upper": self.upper,
               "holds": self.holds}
        if self.note:
            out["note"] = self.note
        return out


def _prefix_exact(values) -> np.ndarray:
    """Correctly rounded prefix sums."""
    vals = [float(v) for v in values]
    return np.array([math.fsum(vals[: i + 1]) for i in range(len(vals))])


# ----------------------------------------------------------------------
# power rules
# ----------------------------------------------------------------------

def power_rule_one(f, q: float, n: int) -> SandwichResult:
    """min{1,q} sum f(k) F(k)^(q-1) <= F(n)^q <= max{1,q} sum f(k) F(k)^(q-1),
    F the partial sums of f, sums over k <= n.

    Terms with F(k) = 0 have f(k) = 0 and are dropped.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    f = np.asarray(f, dtype=np.float64)[:n]
    if len(f) < n:
        raise ValueError(f"need {n} values of f")
    if np.any(f < 0):
        raise ValueError("f must be non-negative")
    F = _prefix_exact(f)
    if q < 1 and F[-1] == 0.0:
        raise ZeroPartialSum("partial sum vanishes where raised to a negative power")
    pos = F > 0
    # f/F <= 1 keeps the terms finite even for subnormal partial sums
    s = math.fsum((f[pos] / F[pos]) * F[pos] ** q)
    return SandwichResult(min(1.0, q) * s, float(F[-1]) ** q, max(1.0, q) * s)


def _divergent_family(f: WeightSequence) -> None:
    model = f.tail_model
    if model is None:
        raise ConvergentSum(f"{f.description} has finite support")
    alpha, gamma, _ = model
    if nx.series_converges(-alpha, gamma):
        raise ConvergentSum(f"sum of {f.description} converges")


def power_rule_two(f: WeightSequence, q: float, n: int,
                   policy: TruncationPolicy | None = None) -> SandwichResult:
    """min{1,1/q} F(n)^-q <= sum_{k>=n} f(k+1) F(k)^-q F(k+1)^-1 <= max{1,1/q} F(n)^-q
    for f with divergent sum; the middle is enclosed with a certified tail.

    Beyond the horizon M, lo k^g <= F(k) <= hi k^g with g = alpha + 1 and
    f(k+1) = (k+1)^alpha, so each term lies between
    hi^(-q-1) (k+1)^(-1-gq) and lo^(-q-1) k^(-1-gq).
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    _divergent_family(f)
    policy = policy or TruncationPolicy(N=10 ** 4)
    M = max(policy.N, n + 1)
    psi = PsiWeight(f)
    g, th_lo, th_hi = psi.growth(M)
    if g <= 0:
        raise UncertifiableTail("partial sums of f need power growth")
    F = psi.cumulative_upto(M + 1)
    fv = f.values_upto(M + 1)
    k = np.arange(n, M + 1)
    terms = fv[k] * F[k - 1] ** (-q) / F[k]
    head = math.fsum(terms)
    s = 1.0 + g * q
    t_lo = th_hi ** (-q - 1.0) * nx.certified_log_power_tail(s, 0.0, M + 2)[0]
    t_hi = th_lo ** (-q - 1.0) * nx.certified_log_power_tail(s, 0.0, M + 1)[1]
    slack = nx.rounding_slack(len(terms), ops=24)
    mid = Interval(head * (1 - slack) + t_lo, head * (1 + slack) + t_hi)
    base = float(F[n - 1]) ** (-q)
    return SandwichResult(min(1.0, 1.0 / q) * base, mid.mid, max(1.0, 1.0 / q) * base,
                          middle_bracket=mid)


# ----------------------------------------------------------------------
# log sums
# ----------------------------------------------------------------------

def log_sum_bounds(n: int, k, m: int) -> tuple[np.ndarray, np.ndarray]:
    """(lower, upper) = (1/(2(m+1)), 2^(m+2)/(m+1)) times ln(k/n)^(m+1)."""
    L = np.log(np.asarray(k, dtype=np.float64) / n) ** (m + 1)
    return L / (2.0 * (m + 1)), 2.0 ** (m + 2) / (m + 1) * L


def log_sum_sandwich(n: int, k: int, m: int) -> SandwichResult:
    """Sandwich for sum_{i=n+1}^{k} ln(i/n)^m / i, valid for n < k."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    if n >= k:
        raise BadRange(f"need n < k, got n={n}, k={k}")
    i = np.arange(n + 1, k + 1, dtype=np.float64)
    middle = math.fsum(np.log(i / n) ** m / i)
    lo, hi = log_sum_bounds(n, k, m)
    return SandwichResult(float(lo), middle, float(hi))


def log_sum_table(n: int, k_max: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower, middle, upper for every k in (n, k_max] at once."""
    if n >= k_max:
        raise BadRange("need n < k_max")
    i = np.arange(n + 1, k_max + 1, dtype=np.float64)
    middle = nx.cumsum(np.log(i / n) ** m / i)
    lo, hi = log_sum_bounds(n, i, m)
    return lo, middle, hi


# ----------------------------------------------------------------------
# mean value
# ----------------------------------------------------------------------

def mean_value_sandwich(x: float, y: float, r: float) -> SandwichResult:
    """r y^(r-1) (x-y) <= x^r - y^r <= r x^(r-1) (x-y) for r < 0 or r > 1,
    reversed for 0 < r < 1; r in {0, 1} is an equality."""
    if x <= 0 or y <= 0:
        raise ValueError("x and y must be positive")
    if x == y:
        raise ValueError("x and y must differ")
    d = x - y
    if abs(d) > 0.5 * max(x, y):
        middle = x ** r - y ** r
    else:
        # close arguments: avoid the cancellation in x^r - y^r
        middle = y ** r * math.expm1(r * math.log1p(d / y))
    if r in (0.0, 1.0):
        return SandwichResult(middle, middle, middle, note="degenerate exponent: equality")
    a = r * y ** (r - 1.0) * d
    b = r * x ** (r - 1.0) * d
    if 0.0 < r < 1.0:
        a, b = b, a
    return SandwichResult(a, middle, b)


# ----------------------------------------------------------------------
# partial sums, Fubini, differences
# ----------------------------------------------------------------------

def partial_sums_dominance(f, g, varphi, N: int) -> tuple[bool, int | None]:
    """If every partial sum of f is at most that of g and varphi is
    non-negative and non-increasing, the varphi-weighted partial sums are
    ordered the same way. Returns (ok, first failing n)."""
    f = np.asarray(f, dtype=np.float64)[:N]
    g = np.asarray(g, dtype=np.float64)[:N]
    vp = np.asarray(varphi, dtype=np.float64)[:N]
    if not len(f) == len(g) == len(vp) == N:
        raise ValueError(f"need {N} values of f, g and varphi")
    if np.any(vp < 0) or np.any(np.diff(vp) > 0):
        raise PreconditionFailed("varphi must be non-negative and non-increasing")
    Ff, Fg = _prefix_exact(f), _prefix_exact(g)
    bad = [i for i in range(N) if not le(Ff[i], Fg[i])]
    if bad:
        raise PreconditionFailed(f"partial sum of f exceeds that of g at n={bad[0] + 1}")
    Wf, Wg = _prefix_exact(f * vp), _prefix_exact(g * vp)
    for i in range(N):
        if not le(Wf[i], Wg[i]):
            return False, i + 1
    return True, None


def fubini_identity(f, g, n: int) -> tuple[float, float]:
    """(sum_k f(k) sum_{j=k}^n g(j), sum_j g(j) sum_{k<=j} f(k))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f = [float(v) for v in np.asarray(f, dtype=np.float64)[:n]]
    g = [float(v) for v in np.asarray(g, dtype=np.float64)[:n]]
    lhs = math.fsum(f[k] * math.fsum(g[k:]) for k in range(n))
    rhs = math.fsum(g[j] * math.fsum(f[: j + 1]) for j in range(n))
    return lhs, rhs


def forward_difference(tau, r: float):
    """(tau+1)^r - tau^r without cancellation."""
    tau = np.asarray(tau, dtype=np.float64)
    return tau ** r * np.expm1(r * np.log1p(1.0 / tau))


@dataclass(frozen=True)
class DifferenceResiduals:
    finite: float              # sum_{tau<=k} D tau^r - ((k+1)^r - 1)
    infinite: float | None     # sum_{tau>k} D tau^r + (k+1)^r, r < 0 only


def infinite_difference_sum(r: float, k: int, horizon: int = 10 ** 5) -> float:
    """sum_{tau>k} of the forward difference of tau^r, for r < 0: explicit
    terms to the horizon plus the telescoped remainder -(H+1)^r."""
    if r >= 0:
        raise OutOfRange("the infinite identity needs r < 0")
    H = max(horizon, k + 1)
    tau = np.arange(k + 1, H + 1, dtype=np.float64)
    return math.fsum(np.append(forward_difference(tau, r), -float(H + 1) ** r))


def difference_operator_identities(r: float, k: int) -> DifferenceResiduals:
    if k < 1:
        raise ValueError("k must be >= 1")
    tau = np.arange(1, k + 1, dtype=np.float64)
    fin = math.fsum(forward_difference(tau, r)) - (float(k + 1) ** r - 1.0)
    inf = None
    if r < 0:
        inf = infinite_difference_sum(r, k) + float(k + 1) ** r
    return DifferenceResiduals(fin, inf)


# ----------------------------------------------------------------------
# power-sum estimates used in the open-ended argument
# ----------------------------------------------------------------------

@dataclass
class ArrayCheck:
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def holds(self) -> bool:
        slack = SLACK_ULPS * ULP * np.maximum(np.abs(self.lhs), np.abs(self.rhs))
        return bool(np.all(self.lhs <= self.rhs + slack))

    @property
    def first_failure(self) -> int | None:
        slack = SLACK_ULPS * ULP * np.maximum(np.abs(self.lhs), np.abs(self.rhs))
        bad = np.nonzero(self.lhs > self.rhs + slack)[0]
        return int(bad[0]) + 1 if bad.size else None


def zeta_tail_bound(eps: float, k_max: int) -> ArrayCheck:
    """sum_{tau>k} tau^-(eps+1) <= 1/(eps k^eps) for k = 1..k_max (Hurwitz zeta)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = np.arange(1, k_max + 1, dtype=np.float64)
    return ArrayCheck(zeta(eps + 1.0, k + 1.0), 1.0 / (eps * k ** eps))


def power_sum_growth_bound(eps: float, k_max: int) -> ArrayCheck:
    """(k+1)^eps <= eps sum_{tau<=k} tau^(eps-1) + 1 for k = 1..k_max.

    Needs 0 < eps <= 1 (equality at eps = 1); for eps > 1 convexity
    reverses the inequality.
    """
    if not 0 < eps <= 1:
        raise OutOfRange("the growth bound needs 0 < eps <= 1")
    k = np.arange(1, k_max + 1, dtype=np.float64)
    return ArrayCheck((k + 1.0) ** eps, eps * nx.cumsum(k ** (eps - 1.0)) + 1.0)


def power_sum_lower_bound(a: float, n_max: int) -> ArrayCheck:
    """n^a <= max{1, a} sum_{k<=n} k^(a-1) for n = 1..n_max (a > 0)."""
    if a <= 0:
        raise ValueError("exponent must be positive")
    k = np.arange(1, n_max + 1, dtype=np.float64)
    return ArrayCheck(k ** a, max(1.0, a) * nx.cumsum(k ** (a - 1.0)))


# ----------------------------------------------------------------------
# randomized suite
# ----------------------------------------------------------------------

@dataclass
class OracleSummary:
    seed: int
    cases: int
    counts: dict = field(default_factory=dict)    # check -> [passed, total]
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool, detail: dict | None = None) -> None:
        c = self.counts.setdefault(name, [0, 0])
        c[1] += 1
        if ok:
            c[0] += 1
        else:
            self.failures.append({"check": name, **(detail or {})})

    def to_dict(self) -> dict:
        return {"seed": self.seed, "cases": self.cases, "passed": self.passed,
                "counts": {k: {"passed": v[0], "total": v[1]} for k, v in self.counts.items()},
                "failures": self.failures, "seconds": self.seconds}


POWER_RULE_Q = (0.0, 0.3, 1.0, 2.0, 5.0)


def run_oracle_suite(seed: int = 0, cases: int = 1000, log_k_max: int = 500,
                     log_m_max: int = 4) -> OracleSummary:
    """Randomised checks of every lemma plus the exhaustive log-sum grid."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    out = OracleSummary(seed, cases)

    for i in range(cases):
        L = int(rng.integers(1, 65))
        f = rng.uniform(0, 10, L) * (rng.random(L) > 0.1)
        q = POWER_RULE_Q[i % len(POWER_RULE_Q)]
        n = int(rng.integers(1, L + 1))
        try:
            res = power_rule_one(f, q, n)
            out.record("power_rule_one", res.holds, {"q": q, "n": n, **res.to_dict()})
        except ZeroPartialSum:
            out.record("power_rule_one", True)

    pol = TruncationPolicy(N=2000)
    for _ in range(cases):
        alpha = float(rng.uniform(-0.9, 2.0))
        q = float(rng.uniform(0.1, 5.0))
        n = int(rng.integers(1, 200))
        res = power_rule_two(WeightSequence.power(alpha), q, n, pol)
        out.record("power_rule_two", res.holds, {"alpha": alpha, "q": q, "n": n, **res.to_dict()})

    for _ in range(cases):
        n = int(rng.integers(1, 65))
        f, g = rng.uniform(0, 10, n), rng.uniform(0, 10, n)
        lhs, rhs = fubini_identity(f, g, n)
        ok = abs(lhs - rhs) <= 16 * ULP * max(abs(lhs), abs(rhs))
        out.record("fubini", ok, {"n": n, "lhs": lhs, "rhs": rhs})

    for _ in range(cases):
        N = int(rng.integers(1, 65))
        f = rng.uniform(0, 10, N)
        g = np.sort(f + rng.uniform(0, 1, N) * (rng.random(N) > 0.5))[::-1]
        vp = np.sort(rng.uniform(0, 1, N))[::-1]
        ok, where = partial_sums_dominance(f, g, vp, N)
        out.record("partial_sums", ok, {"N": N, "first_failure": where})

    for _ in range(cases):
        x, y = rng.uniform(0.01, 10, 2)
        if x == y:
            continue
        r = float(rng.choice([rng.uniform(-3, 0), rng.uniform(0, 1), rng.uniform(1, 4)]))
        res = mean_value_sandwich(float(x), float(y), r)
        out.record("mean_value", res.holds, {"x": x, "y": y, "r": r, **res.to_dict()})

    for m in range(log_m_max + 1):
        for n in range(1, log_k_max):
            lo, mid, hi = log_sum_table(n, log_k_max, m)
            slack = SLACK_ULPS * ULP * np.maximum(mid, hi)
            bad = np.nonzero((lo > mid + slack) | (mid > hi + slack))[0]
            for b in bad:
                out.record("log_sum", False, {"n": n, "k": int(n + 1 + b), "m": m})
            out.counts.setdefault("log_sum", [0, 0])
            out.counts["log_sum"][0] += len(mid) - len(bad)
            out.counts["log_sum"][1] += len(mid) - len(bad)
    out.seconds = time.perf_counter() - t0
    return out
