import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardyweights import _numerics as nx
from hardyweights.errors import DivergentTail, UncertifiableTail, UnsupportedFamily
from hardyweights.sequences import (Interval, QuasiSequence, TailMode, TruncationPolicy,
                                    WeightSequence, is_quasi_nonincreasing, parse_weight,
                                    prefix_weighted_sum, tail_power_sum,
                                    weighted_tail_remainder)


def hurwitz(s, a):
    """sum_{k>=a} k^-s, independent oracle."""
    return float(mpmath.zeta(s, a))


# ---------------------------------------------------------------- Interval

def test_interval_rejects_reversed_endpoints():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)


def test_interval_arithmetic():
    a = Interval(1.0, 2.0)
    assert (a + Interval(0.5, 0.5)).to_dict() == {"lo": 1.5, "hi": 2.5}
    assert (a + 1.0).lo == 2.0
    assert a.scale(2.0).hi == 4.0
    assert a.contains(1.5) and not a.contains(2.5)
    assert Interval(0.0, math.inf).unbounded
    with pytest.raises(ValueError):
        a.scale(-1.0)


def test_policy_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(N=0)
    with pytest.raises(ValueError):
        TruncationPolicy(rel_tol=1.5)
    assert TruncationPolicy(tail_mode="none").tail_mode is TailMode.NONE
    assert TruncationPolicy().with_horizon(50).N == 50


# ---------------------------------------------------------- WeightSequence

def test_families_evaluate():
    k = np.arange(1, 6, dtype=float)
    assert np.allclose(WeightSequence.power(0.5).values_upto(5), k ** 0.5)
    assert np.allclose(WeightSequence.powerlog(1, -2).values_upto(5), k / (1 + np.log(k)) ** 2)
    ex = WeightSequence.explicit([1, 2])
    assert list(ex.values_upto(4)) == [1, 2, 0, 0]
    assert ex.support_end == 2 and ex.tail_model is None
    tail = WeightSequence.explicit([5, 5], tail_alpha=-1)
    assert tail.values_upto(4)[2:].tolist() == [1 / 3, 1 / 4]
    assert tail.tail_model == (-1.0, 0.0, 3)
    assert WeightSequence.power(2)(3) == 9.0


def test_explicit_rejects_negative_values():
    with pytest.raises(ValueError):
        WeightSequence.explicit([1, -1])
    with pytest.raises(UnsupportedFamily):
        WeightSequence("geometric")


def test_parse_weight(tmp_path):
    assert parse_weight("power:alpha=0.5") == WeightSequence.power(0.5)
    assert parse_weight("powerlog:alpha=1,gamma=-2") == WeightSequence.powerlog(1, -2)
    f = tmp_path / "w.txt"
    f.write_text("# weights\n1\n0.5\n\n2\n")
    w = parse_weight(f"explicit:file={f},tail=-2")
    assert w.values == (1.0, 0.5, 2.0) and w.tail_alpha == -2.0
    with pytest.raises(ValueError):
        parse_weight("power:beta=1")
    with pytest.raises(ValueError):
        parse_weight("zeta:s=2")


# ------------------------------------------------------------------- sums

def test_prefix_weighted_sum_examples():
    assert prefix_weighted_sum(WeightSequence.power(0), 3, 0) == 3
    assert prefix_weighted_sum(WeightSequence.power(1), 3, 0) == 6
    brute = sum(k ** 1.5 for k in range(1, 101))
    assert prefix_weighted_sum(WeightSequence.power(0.5), 100, 1) == pytest.approx(brute, rel=1e-14)


@given(st.floats(-2, 2), st.floats(-1, 1), st.integers(1, 400))
def test_prefix_sum_matches_naive_accumulation(alpha, e, n):
    w = WeightSequence.power(alpha)
    naive = 0.0
    for k in range(1, n + 1):
        naive += k ** e * k ** alpha
    got = prefix_weighted_sum(w, n, e)
    assert abs(got - naive) <= 8 * n * 2 ** -53 * naive + 1e-300


def test_tail_power_sum_contains_zeta2():
    iv = tail_power_sum(WeightSequence.power(0), 1, 2, TruncationPolicy(N=10 ** 6))
    assert iv.contains(math.pi ** 2 / 6)
    assert iv.rel_width() < 1e-10


def test_tail_power_sum_divergent():
    with pytest.raises(DivergentTail):
        tail_power_sum(WeightSequence.power(0), 1, 0.5)


def test_tail_power_sum_finite_support_is_exact():
    iv = tail_power_sum(WeightSequence.explicit([1, 1, 1]), 2, 3, TruncationPolicy(N=10))
    assert iv.contains(1 + 8 / 27)
    assert iv.width < 1e-14


@pytest.mark.parametrize("alpha,p", [(0, 2), (-0.5, 1), (1, 3), (0.5, 1.6)])
def test_tail_power_sum_contains_larger_horizon_value(alpha, p):
    w, n = WeightSequence.power(alpha), 3
    iv = tail_power_sum(w, n, p, TruncationPolicy(N=2000))
    k = np.arange(n, 20001, dtype=float)
    brute = math.fsum((n / k) ** p * k ** alpha)
    # brute force is a lower bound of the infinite sum; add the exact rest for the check
    rest = n ** p * hurwitz(p - alpha, 20001)
    assert iv.lo <= brute + rest <= iv.hi
    assert brute <= iv.hi


@given(st.floats(1.05, 4.0), st.integers(1, 3000))
def test_certified_tail_brackets_hurwitz_zeta(s, start):
    lo, hi = nx.certified_log_power_tail(s, 0.0, start)
    exact = hurwitz(s, start)
    assert lo <= exact <= hi


def _log_integral_oracle(s, gamma, x0):
    """int_x0^inf x^-s (1+ln x)^gamma dx after the substitution x = e^t."""
    return mpmath.quad(lambda t: mpmath.exp((1 - s) * t) * (1 + t) ** gamma,
                       [mpmath.log(x0), mpmath.log(x0) + 50, mpmath.inf])


def _log_tail_oracle(s, gamma, start, M=20000):
    """Brute sum to M plus an integral-test bracket on the remaining tail."""
    f = lambda k: k ** (-s) * (1 + math.log(k)) ** gamma
    head = math.fsum(f(k) for k in range(start, M))
    I = float(_log_integral_oracle(s, gamma, M))
    return head + I, head + I + f(M)


@pytest.mark.parametrize("s,gamma,start", [(1.0, -2.0, 1), (1.0, -3.0, 10), (2.0, 1.5, 1),
                                           (1.5, -1.0, 5), (3.0, 4.0, 2)])
def test_certified_log_power_tail_against_independent_oracle(s, gamma, start):
    lo, hi = nx.certified_log_power_tail(s, gamma, start)
    olo, ohi = _log_tail_oracle(s, gamma, start)
    assert lo <= ohi * (1 + 1e-12) and olo * (1 - 1e-12) <= hi


def test_closed_form_log_tail():
    # sum_{k>=10} 1/(k (1+ln k)^3) lies between the integrals from 10 and from 9
    lo, hi = nx.certified_log_power_tail(1.0, -3.0, 10)
    assert lo >= 0.5 / (1 + math.log(10)) ** 2 * (1 - 1e-12)
    assert hi <= 0.5 / (1 + math.log(9)) ** 2 * (1 + 1e-12)


def test_log_power_integral_matches_quadrature():
    for s, gamma in [(1.5, 2.0), (1.0, -2.5), (2.0, 0.0), (2.5, -0.5)]:
        quad = float(_log_integral_oracle(s, gamma, 3.0))
        assert nx.log_power_integral(s, gamma, 3.0) == pytest.approx(quad, rel=1e-10)


def test_divergent_series_detected():
    assert not nx.series_converges(1.0, -1.0)
    assert nx.series_converges(1.0, -1.01)
    with pytest.raises(DivergentTail):
        nx.certified_log_power_tail(0.9, 0.0, 1)


def test_no_tail_mode_heuristic():
    pol = TruncationPolicy(N=100, tail_mode=TailMode.NONE, rel_tol=1e-3)
    with pytest.raises(UncertifiableTail):
        weighted_tail_remainder(WeightSequence.power(0), -1.5, 100, pol)
    fast = weighted_tail_remainder(WeightSequence.power(0), -30, 100, pol)
    assert fast.lo < 1e-50 and fast.contains(fast.lo)
    assert fast.hi <= 2 * pol.rel_tol  # heuristic bracket scaled by rel_tol


def test_remainder_of_explicit_data_beyond_horizon():
    w = WeightSequence.explicit([1, 1, 1, 1])
    iv = weighted_tail_remainder(w, -1, 2)
    assert iv.lo == iv.hi == pytest.approx(1 / 3 + 1 / 4)


# ------------------------------------------------------ quasi-monotonicity

def test_quasi_examples():
    k = np.arange(1, 1001, dtype=float)
    assert is_quasi_nonincreasing(k[:100], 1.0, 100) == (True, None)
    assert is_quasi_nonincreasing(k[:10] ** 2, 1.0, 10) == (False, 1)
    assert is_quasi_nonincreasing(k ** 0.5 * (1 + 1 / k), 0.5, 1000)[0]
    assert is_quasi_nonincreasing(lambda j: 1.0 / j, 0.0, 50)[0]


@given(st.floats(-1, 3), st.integers(2, 5000))
def test_power_is_quasi_at_its_own_exponent(beta, N):
    y = QuasiSequence(beta, WeightSequence.power(beta))
    assert is_quasi_nonincreasing(y, beta, N)[0]


def test_quasi_rejects_beta_below_minus_one():
    with pytest.raises(ValueError):
        QuasiSequence(-2, WeightSequence.power(0))
