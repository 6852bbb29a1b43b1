"""Open-ended property, embedding weights and the extrapolation constant.

The extrapolation statement runs from exponent p0 to every p >= p0 on
quasi non-increasing pairs (f, g). Its hypothesis quantifies over the
whole weight class at p0; here it is checked on a finite panel, which
is evidence, not a proof.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _numerics as nx
from .classes import (ConstantEstimate, check_doubling_2n, equivalence_transform,
                      generalized_psi_condition, qb_constant)
from .errors import (BisectionExhausted, EmptyGrid, HypothesisViolated, NotMember,
                     NotQuasiMonotone, OutOfRange, UncertifiableTail, VerificationFailure)
from .operators import PsiWeight, smoothing_operator_T
from .sequences import (QuasiSequence, TruncationPolicy, WeightSequence,
                        _parse_kv, is_quasi_nonincreasing)
from .verifier import upper_bound_constant


# ----------------------------------------------------------------------
# phi
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PhiFunction:
    """Non-negative, non-decreasing phi on (0, inf).

    ``linear``: a x;  ``power``: a x^r (r >= 0);  ``table``: piecewise
    linear through monotone (x, y) points, undefined outside them.
    """

    family: str
    a: float = 1.0
    r: float = 1.0
    points: tuple = ()

    def __post_init__(self):
        if self.family not in ("linear", "power", "table"):
            raise ValueError(f"unknown phi family {self.family!r}")
        if self.family in ("linear", "power") and self.a < 0:
            raise ValueError("phi must be non-negative")
        if self.family == "power" and self.r < 0:
            raise ValueError("phi = a x^r needs r >= 0 to be non-decreasing")
        if self.family == "table":
            pts = tuple(sorted((float(x), float(y)) for x, y in self.points))
            if len(pts) < 2:
                raise ValueError("a phi table needs at least two points")
            ys = [y for _, y in pts]
            if ys[0] < 0 or any(b < a for a, b in zip(ys, ys[1:])):
                raise ValueError("tabulated phi must be non-negative and non-decreasing")
            object.__setattr__(self, "points", pts)

    @classmethod
    def identity(cls) -> "PhiFunction":
        return cls("linear", a=1.0)

    @classmethod
    def constant(cls, a: float) -> "PhiFunction":
        return cls("power", a=a, r=0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0):
            raise OutOfRange("phi is defined on (0, inf)")
        if self.family == "linear":
            out = self.a * x
        elif self.family == "power":
            out = self.a * x ** self.r
        else:
            xs = np.array([p[0] for p in self.points])
            ys = np.array([p[1] for p in self.points])
            if np.any(x < xs[0]) or np.any(x > xs[-1]):
                raise OutOfRange(f"phi table covers [{xs[0]:g}, {xs[-1]:g}]")
            out = np.interp(x, xs, ys)
        return float(out) if out.ndim == 0 else out

    def check_monotone(self, grid) -> None:
        """Raise ValueError if phi decreases anywhere on the sorted grid."""
        xs = np.sort(np.asarray(grid, dtype=np.float64))
        ys = np.atleast_1d(self(xs))
        if np.any(ys < 0) or np.any(np.diff(ys) < 0):
            raise ValueError("phi is not non-negative and non-decreasing on the grid")

    def spec_string(self) -> str:
        if self.family == "linear":
            return "id" if self.a == 1.0 else f"pow:a={self.a:g},r=1"
        if self.family == "power":
            return f"const:a={self.a:g}" if self.r == 0 else f"pow:a={self.a:g},r={self.r:g}"
        return f"table:{len(self.points)} points"


def parse_phi(text: str) -> PhiFunction:
    """``id``, ``const:a=<r>``, ``pow:a=<r>,r=<r>`` or ``table:file=<path>``."""
    name, _, body = text.partition(":")
    kv = _parse_kv(body)
    try:
        if name == "id":
            return PhiFunction.identity()
        if name == "const":
            return PhiFunction.constant(float(kv["a"]))
        if name == "pow":
            return PhiFunction("power", a=float(kv["a"]), r=float(kv["r"]))
        if name == "table":
            return PhiFunction("table", points=tuple(_read_table(kv["file"])))
    except KeyError as exc:
        raise ValueError(f"{text!r}: missing parameter {exc.args[0]}") from None
    raise ValueError(f"unknown phi family {name!r}")


def _read_table(path) -> list[tuple[float, float]]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            x, y = line.replace(",", " ").split()[:2]
            try:
                rows.append((float(x), float(y)))
            except ValueError:
                if rows:  # only a leading header row may be non-numeric
                    raise
    return rows


# ----------------------------------------------------------------------
# open-ended property
# ----------------------------------------------------------------------

@dataclass
class EpsilonResult:
    eps_formula: float
    eps_verified: float
    new_class_constant: ConstantEstimate
    base_constant: ConstantEstimate
    c_used: float

    def __post_init__(self):
        if not 0 < self.eps_verified <= self.eps_formula:
            raise ValueError("verified epsilon must lie in (0, eps_formula]")

    def to_dict(self, beta: float, p: float) -> dict:
        return {
            "beta": beta,
            "p": p,
            "c": self.c_used,
            "eps_formula": self.eps_formula,
            "eps_verified": self.eps_verified,
            "base": self.base_constant.to_dict("QB", beta, p),
            "improved": self.new_class_constant.to_dict("QB", beta, p - self.eps_verified),
        }


def epsilon_bound(c: float, beta: float, p: float) -> float:
    """1 / (2 (c + 1) max{1/(p + beta p), 1}), c the tail constant."""
    return 1.0 / (2.0 * (c + 1.0) * max(1.0 / (p + beta * p), 1.0))


def openended_epsilon(w: WeightSequence, beta: float, p: float,
                      policy: TruncationPolicy | None = None,
                      coarse_steps: int = 40, refine_steps: int = 40) -> EpsilonResult:
    """Exponent drop that keeps w in the class.

    c is the tail constant: the class constant bracket's upper end minus
    the one contributed by the prefix. The formula value is tried first;
    if it fails, a log grid below it locates a passing value, refined by
    bisection against the smallest failing one above it.
    """
    policy = policy or TruncationPolicy()
    base = qb_constant(w, beta, p, policy)
    if not base.is_member:
        raise NotMember(f"{w.description} is not a QB_({beta:g},{p:g}) member "
                        f"({base.verdict.value})")
    c = base.bracket.hi - 1.0
    eps_f = epsilon_bound(c, beta, p)

    def passes(eps: float) -> bool:
        return p - eps > 0 and qb_constant(w, beta, p - eps, policy).is_member

    if passes(eps_f):
        eps_v = eps_f
    else:
        fail, ok = eps_f, None
        for j in range(1, coarse_steps + 1):
            trial = eps_f * 10.0 ** (-j / 4.0)
            if passes(trial):
                ok = trial
                break
            fail = trial
        if ok is None:
            raise BisectionExhausted(
                f"no epsilon down to {eps_f * 10 ** (-coarse_steps / 4):.3g} verified; "
                "raise the horizon")
        for _ in range(refine_steps):
            mid = 0.5 * (ok + fail)
            if passes(mid):
                ok = mid
            else:
                fail = mid
        eps_v = ok
    new = qb_constant(w, beta, p - eps_v, policy)
    return EpsilonResult(eps_f, eps_v, new, base, c)


@dataclass
class KernelCheck:
    """Exponential-kernel sum against two closed-form bounds, per n."""

    n: np.ndarray
    kernel_sum: list            # Interval per n
    prefix: np.ndarray          # F(n) = sum_{i<=n} i^{beta p} w(i)
    C: float
    eps: float
    bound_stated: np.ndarray    # F(n) / (1 - 2 eps C)
    bound_iterated: np.ndarray  # 2C F(n) / (1 - 2 eps C)

    @property
    def stated_holds(self) -> np.ndarray:
        return np.array([iv.lo <= b for iv, b in zip(self.kernel_sum, self.bound_stated)])

    @property
    def iterated_holds(self) -> np.ndarray:
        return np.array([iv.hi <= b for iv, b in zip(self.kernel_sum, self.bound_iterated)])


def exponential_kernel_check(w: WeightSequence, beta: float, p: float, eps: float,
                             n_values: Sequence[int],
                             policy: TruncationPolicy | None = None) -> KernelCheck:
    """Enclose n^a sum_{k>=n} (k/n)^eps k^(-a-1) F(k), a = p + beta p.

    Expanding (k/n)^eps as a power series in ln(k/n), the m-th term is the
    log kernel, which is dominated by m + 1 applications of the smoothing
    operator; with T F <= 2C F this sums to 2C/(1 - 2 eps C) F(n). The
    bound without the leading 2C is reported alongside for comparison.
    """
    policy = policy or TruncationPolicy()
    base = qb_constant(w, beta, p, policy)
    if not base.is_member:
        raise NotMember(f"{w.description} is not a QB_({beta:g},{p:g}) member")
    a = p + beta * p
    C = base.bracket.hi * max(1.0 / a, 1.0)
    if not 0 < eps < 1.0 / (2.0 * C):
        raise OutOfRange(f"need 0 < eps < 1/(2C) = {1 / (2 * C):.4g}")
    v = equivalence_transform(w, beta, p)
    psi = PsiWeight(v)
    g, _, th_hi = psi.growth(max(policy.N, max(n_values)))
    M = max(policy.N, max(n_values))
    F_table = psi.cumulative_upto(M)

    def F(k):
        return F_table[np.asarray(k) - 1]

    sums = []
    for n in n_values:
        # n^a sum (k/n)^eps k^(-a-1) F = n^(a - eps) sum k^(-(a - eps) - 1) F
        sums.append(smoothing_operator_T(F, a - eps, 0.0, int(n), policy, growth=(th_hi, g)))
    n_arr = np.asarray(n_values, dtype=np.int64)
    Fn = F(n_arr)
    denom = 1.0 - 2.0 * eps * C
    return KernelCheck(n_arr, sums, Fn, C, eps, Fn / denom, 2.0 * C * Fn / denom)


# ----------------------------------------------------------------------
# embedding weights
# ----------------------------------------------------------------------

def embedding_weight_constant(beta: float, p0: float, eps: float) -> float:
    """(1 + 1/eps) max{p0 (1 + beta) - eps, 1}."""
    if not 0 < eps < p0 * (beta + 1.0):
        raise OutOfRange(f"eps must lie in (0, {p0 * (beta + 1):g})")
    return (1.0 + 1.0 / eps) * max(p0 * (1.0 + beta) - eps, 1.0)


def verify_embedding_weight(beta: float, p0: float, eps: float, n: int,
                            policy: TruncationPolicy | None = None) -> bool:
    """Check that k^(p0-1-eps) on k <= n obeys the tail inequality
    sum_{k>=m} (m/k)^p0 w(k) <= c sum_{k<=m} (k/m)^(beta p0) w(k)
    at every m <= n (beyond n the tail vanishes and the inequality is
    inherited from m = n), with c the embedding constant.
    """
    c = embedding_weight_constant(beta, p0, eps)
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=np.float64)
    w = k ** (p0 - 1.0 - eps)
    m = k
    tail = m ** p0 * nx.rcumsum(k ** (-p0) * w)
    pre = m ** (-beta * p0) * nx.cumsum(k ** (beta * p0) * w)
    tol = 1.0 + 4 * nx.rounding_slack(n)
    bad = np.nonzero(tail > c * pre * tol)[0]
    if bad.size:
        i = int(bad[0]) + 1
        raise VerificationFailure(
            f"tail {tail[i - 1]:.6g} > {c:g} * prefix {pre[i - 1]:.6g} at m={i}", i)
    return True


# ----------------------------------------------------------------------
# extrapolation constant
# ----------------------------------------------------------------------

def _check_regime(p0: float, p: float, beta: float) -> None:
    if not p >= p0 >= 2:
        raise OutOfRange("need p >= p0 >= 2")
    if beta < 0:
        raise OutOfRange("need beta >= 0")


def extrapolation_constant(p0: float, p: float, beta: float, eps: float,
                           phi: PhiFunction) -> float:
    """(q max{p0 - eps, 1} phi(q (1 + 1/eps)))^(p/p0), q = p0 (1 + beta) - eps."""
    _check_regime(p0, p, beta)
    if not 0 < eps <= p0 - 1:
        raise OutOfRange(f"eps must lie in (0, {p0 - 1:g}]")
    q = p0 * (1.0 + beta) - eps
    return (q * max(p0 - eps, 1.0) * phi(q * (1.0 + 1.0 / eps))) ** (p / p0)


@dataclass
class TildePhi:
    value: float                 # outer factor times c at the chosen eps
    inf_c: float                 # min over the grid of the eps-constant
    eps_star: float              # eps attaining value
    outer_factor: float
    per_eps: dict = field(default_factory=dict, repr=False)  # eps -> (c, outer)

    def to_dict(self) -> dict:
        return {"value": self.value, "inf_c": self.inf_c, "eps_star": self.eps_star,
                "outer_factor": self.outer_factor,
                "per_eps": {str(e): {"c": c, "outer": o} for e, (c, o) in self.per_eps.items()}}


def outer_factor(w: WeightSequence, p0: float, p: float, beta: float, eps: float,
                 policy: TruncationPolicy | None = None) -> float:
    """Absorbed Hardy upper bound for psi = k^(p0-eps-1), weight beta p0 and
    exponent p/p0 on w; inf when the psi-condition is not certified."""
    policy = policy or TruncationPolicy()
    return _outer_factor_cached(w, p0, p, beta, eps, policy)


@functools.lru_cache(maxsize=4096)
def _outer_factor_cached(w, p0, p, beta, eps, policy) -> float:
    a = p0 - eps - 1.0
    psi = PsiWeight.power(a)
    q = p / p0
    try:
        cond = generalized_psi_condition(w, psi, beta * p0, q, policy)
    except UncertifiableTail:
        return math.inf
    if not cond.is_member:
        return math.inf
    rep = check_doubling_2n(psi, policy.N)
    if not rep.holds:
        return math.inf
    # the ratio Psi(n) / sum_{n}^{2n} psi tends to 1/(2^(a+1) - 1) for k^a
    c = max(rep.constant, 1.0 / (2.0 ** (a + 1.0) - 1.0))
    return upper_bound_constant(c, cond.bracket.hi, beta * p0, q).absorbed


def extrapolation_tilde_phi(p0: float, p: float, beta: float, phi: PhiFunction,
                            eps_grid: Iterable[float], outer: float | None = None,
                            weight: WeightSequence | None = None,
                            policy: TruncationPolicy | None = None) -> TildePhi:
    """Outer factor times the eps-constant, minimised over the grid.

    With ``outer`` given it multiplies inf c directly. With ``weight``
    the factor is computed per eps (see :func:`outer_factor`) and the
    product is minimised, each product being a valid constant. With
    neither the factor is 1 and the value is inf c alone.
    """
    grid = sorted(set(float(e) for e in eps_grid))
    if not grid:
        raise EmptyGrid("epsilon grid is empty")
    _check_regime(p0, p, beta)
    if grid[0] <= 0 or grid[-1] > p0 - 1:
        raise OutOfRange(f"grid must lie in (0, {p0 - 1:g}]")
    args = [(p0 * (1 + beta) - e) * (1 + 1 / e) for e in grid]
    phi.check_monotone(args)
    cs = {e: extrapolation_constant(p0, p, beta, e, phi) for e in grid}
    inf_c = min(cs.values())
    if weight is None:
        factor = 1.0 if outer is None else float(outer)
        e_star = min(grid, key=lambda e: cs[e])
        return TildePhi(factor * inf_c, inf_c, e_star, factor,
                        {e: (cs[e], factor) for e in grid})
    per = {e: (cs[e], outer_factor(weight, p0, p, beta, e, policy)) for e in grid}
    e_star = min(grid, key=lambda e: per[e][0] * per[e][1])
    c_star, o_star = per[e_star]
    return TildePhi(c_star * o_star, inf_c, e_star, o_star, per)


# ----------------------------------------------------------------------
# end-to-end check
# ----------------------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _qb_cached(w: WeightSequence, beta: float, p: float, policy: TruncationPolicy):
    return qb_constant(w, beta, p, policy)


class HypothesisPanel:
    """Weights of QB_{beta,p0} with phi of their class constants, stacked
    as a matrix over indices 1..L for fast checks on pairs supported in
    [1, L]."""

    def __init__(self, weights: Sequence[WeightSequence], beta: float, p0: float,
                 phi: PhiFunction, L: int, policy: TruncationPolicy | None = None):
        policy = policy or TruncationPolicy()
        self.weights = list(weights)
        self.L = L
        consts = []
        for w in self.weights:
            est = _qb_cached(w, beta, p0, policy)
            if not est.is_member:
                raise NotMember(f"panel weight {w.description} is not in QB_({beta:g},{p0:g})")
            consts.append(est.bracket.lo)
        self.class_constants = np.array(consts)
        self.phi_values = np.atleast_1d(phi(self.class_constants))
        self.matrix = np.vstack([w.values_upto(L) for w in self.weights])
        self.p0 = p0

    def margins(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """phi([w]) sum g^p0 w - sum f^p0 w for every panel weight."""
        if max(len(f), len(g)) > self.L:
            raise ValueError(f"pair support exceeds the panel length {self.L}")
        f = np.pad(np.asarray(f, dtype=np.float64), (0, self.L - len(f)))
        g = np.pad(np.asarray(g, dtype=np.float64), (0, self.L - len(g)))
        lhs = self.matrix @ (f[: self.L] ** self.p0)
        rhs = self.phi_values * (self.matrix @ (g[: self.L] ** self.p0))
        return rhs * (1 + 8 * nx.rounding_slack(self.L)) - lhs

    def holds(self, f: np.ndarray, g: np.ndarray) -> bool:
        return bool(np.all(self.margins(f, g) >= 0))


def default_hypothesis_panel(beta: float, p0: float, L: int,
                             eps_values: Sequence[float] | None = None) -> list[WeightSequence]:
    """Truncated embedding weights k^(p0-1-eps) on k <= n for every n <= L,
    plus a few power weights of the class."""
    eps_values = eps_values or sorted({0.5, 1.0, p0 - 1.0})
    panel = [WeightSequence.truncated_power(p0 - 1.0 - e, n)
             for e in eps_values for n in range(1, L + 1)]
    panel += [WeightSequence.power(a) for a in (-0.75, -0.25, 0.25 * (p0 - 1.0))]
    return panel


def default_conclusion_panel(beta: float, p: float) -> list[WeightSequence]:
    """Members of QB_{beta,p} kept apart from the default hypothesis panel."""
    return [WeightSequence.power(-0.5), WeightSequence.power(0.0),
            WeightSequence.power(0.5 * (p - 1.0)),
            WeightSequence.truncated_power(-0.5, 40)]


@dataclass
class WeightOutcome:
    weight: str
    ratio: float
    tilde_phi: TildePhi
    holds: bool

    @property
    def margin(self) -> float:
        return self.tilde_phi.value - self.ratio

    def to_dict(self) -> dict:
        return {"weight": self.weight, "ratio": self.ratio, "tilde_phi": self.tilde_phi.value,
                "eps_star": self.tilde_phi.eps_star, "outer_factor": self.tilde_phi.outer_factor,
                "margin": self.margin, "holds": self.holds}


@dataclass
class ExtrapolationReport:
    p0: float
    p: float
    beta: float
    hypothesis_min_margin: float
    outcomes: list

    @property
    def holds(self) -> bool:
        return all(o.holds for o in self.outcomes)

    def to_dict(self) -> dict:
        return {"p0": self.p0, "p": self.p, "beta": self.beta,
                "hypothesis_min_margin": self.hypothesis_min_margin,
                "holds": self.holds, "weights": [o.to_dict() for o in self.outcomes]}


def _support(y: QuasiSequence, N: int) -> int:
    end = y.source.support_end
    return min(end, N) if end is not None else N


def run_extrapolation_check(f: QuasiSequence, g: QuasiSequence, phi: PhiFunction,
                            p0: float, p: float, beta: float,
                            weights: Sequence[WeightSequence] | None = None,
                            policy: TruncationPolicy | None = None,
                            hypothesis_weights: Sequence[WeightSequence] | None = None,
                            eps_grid: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
                            panel: HypothesisPanel | None = None) -> ExtrapolationReport:
    """Check the hypothesis at p0 on a panel, then the conclusion at p.

    Pairs without finite support are summed to the horizon only.
    """
    _check_regime(p0, p, beta)
    policy = policy or TruncationPolicy()
    for y, name in ((f, "f"), (g, "g")):
        if y.beta != beta:
            raise ValueError(f"{name} is declared in Q_{y.beta:g}, expected Q_{beta:g}")
        ok, bad = is_quasi_nonincreasing(y, beta, max(_support(y, policy.N) + 1, 2))
        if not ok:
            raise NotQuasiMonotone(f"{name}: k^-beta {name}(k) increases at k={bad}")
    L = max(_support(f, policy.N), _support(g, policy.N))
    fv, gv = f.values_upto(L), g.values_upto(L)
    if panel is None:
        if hypothesis_weights is None:
            hypothesis_weights = default_hypothesis_panel(beta, p0, L)
        panel = HypothesisPanel(hypothesis_weights, beta, p0, phi, L, policy)
    margins = panel.margins(fv, gv)
    if np.any(margins < 0):
        i = int(np.argmin(margins))
        raise HypothesisViolated(
            f"sum f^p0 w > phi([w]) sum g^p0 w for {panel.weights[i].description}")
    weights = list(weights) if weights is not None else default_conclusion_panel(beta, p)
    outcomes = []
    for w in weights:
        if not _qb_cached(w, beta, p, policy).is_member:
            raise NotMember(f"{w.description} is not in QB_({beta:g},{p:g})")
        wv = w.values_upto(L)
        num = math.fsum(fv ** p * wv)
        den = math.fsum(gv ** p * wv)
        ratio = num / den if den > 0 else (0.0 if num == 0 else math.inf)
        tp = extrapolation_tilde_phi(p0, p, beta, phi, eps_grid, weight=w, policy=policy)
        holds = ratio <= tp.value * (1 + 8 * nx.rounding_slack(L))
        outcomes.append(WeightOutcome(w.description, ratio, tp, holds))
    return ExtrapolationReport(p0, p, beta, float(np.min(margins)), outcomes)


def random_quasi_pair(rng: np.random.Generator, beta: float,
                      max_len: int = 32) -> tuple[QuasiSequence, QuasiSequence]:
    """Random compactly supported f, g in Q_beta: k^beta times sorted
    non-increasing profiles, f's profile a random perturbation of g's."""
    L = int(rng.integers(1, max_len + 1))
    k = np.arange(1, L + 1, dtype=np.float64)
    hg = np.sort(rng.uniform(0.05, 1.0, L))[::-1]
    hf = np.sort(hg * rng.uniform(0.2, 1.8, L))[::-1]
    mk = lambda h: QuasiSequence(beta, WeightSequence.explicit(k ** beta * h))
    return mk(hf), mk(hg)
