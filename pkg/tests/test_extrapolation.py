import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import zeta

from hardyweights.classes import qb_constant
from hardyweights.errors import (EmptyGrid, HypothesisViolated, NotMember, NotQuasiMonotone,
                                 OutOfRange, VerificationFailure)
from hardyweights.extrapolation import (HypothesisPanel, PhiFunction, default_hypothesis_panel,
                                        embedding_weight_constant, epsilon_bound,
                                        exponential_kernel_check, extrapolation_constant,
                                        extrapolation_tilde_phi, openended_epsilon, parse_phi,
                                        random_quasi_pair, run_extrapolation_check,
                                        verify_embedding_weight)
from hardyweights.sequences import QuasiSequence, TruncationPolicy, WeightSequence
from hardyweights.verifier import extremal_truncated_power

POL = TruncationPolicy(N=10 ** 4)


# --------------------------------------------------------------------- phi

def test_phi_families(tmp_path):
    assert PhiFunction.identity()(3.0) == 3.0
    assert PhiFunction.constant(2.0)(100.0) == 2.0
    assert parse_phi("pow:a=2,r=0.5")(4.0) == pytest.approx(4.0)
    t = tmp_path / "phi.csv"
    t.write_text("x,phi\n1,1\n3,2\n5,2.5\n")
    phi = parse_phi(f"table:file={t}")
    assert phi(2.0) == pytest.approx(1.5)
    with pytest.raises(OutOfRange):
        phi(6.0)
    with pytest.raises(OutOfRange):
        PhiFunction.identity()(0.0)
    with pytest.raises(ValueError):
        PhiFunction("power", a=1, r=-1)
    with pytest.raises(ValueError):
        parse_phi("exp:a=1")
    assert parse_phi("id").spec_string() == PhiFunction.identity().spec_string()


# ------------------------------------------------------------ open-ended

def test_openended_power0():
    res = openended_epsilon(WeightSequence.power(0), 0, 2, POL)
    c = res.base_constant.bracket.hi - 1
    assert c == pytest.approx(math.pi ** 2 / 6, rel=1e-3)
    assert res.eps_formula == pytest.approx(1 / (2 * (c + 1)))
    assert 0 < res.eps_verified <= res.eps_formula
    assert res.new_class_constant.is_member
    assert res.to_dict(0, 2)["improved"]["p"] == pytest.approx(2 - res.eps_verified)


def test_openended_rejects_boundary_weight():
    with pytest.raises(NotMember):
        openended_epsilon(WeightSequence.power(1), 0, 2, POL)


@given(st.floats(0, 10), st.floats(0, 2), st.floats(0.5, 4))
def test_epsilon_bound_formula(c, beta, p):
    a = p + beta * p
    assert epsilon_bound(c, beta, p) == pytest.approx(1 / (2 * (c + 1) * max(1 / a, 1)))
    if beta == 0 and p >= 1:
        assert epsilon_bound(c, 0, p) == pytest.approx(1 / (2 * (c + 1)))


@pytest.mark.parametrize("alpha,beta,p", [(0.9, 0, 2), (-0.5, 1, 1.5), (1.5, 1, 3)])
def test_openended_formula_value_verifies(alpha, beta, p):
    res = openended_epsilon(WeightSequence.power(alpha), beta, p, POL)
    assert res.eps_verified == res.eps_formula


# ---------------------------------------------------- exponential kernel

def test_kernel_sum_matches_zeta_and_needs_2C_factor():
    # Power(0), beta = 0, p = 2: F(k) = k and at n = 1 the kernel sum is zeta(2 - eps)
    eps = 0.01
    kc = exponential_kernel_check(WeightSequence.power(0), 0, 2, eps, [1, 10, 100], POL)
    assert kc.kernel_sum[0].contains(float(zeta(2 - eps)))
    assert np.all(kc.iterated_holds)
    # without the 2C factor the bound is violated at n = 1
    assert not kc.stated_holds[0]
    assert kc.bound_stated[0] < float(zeta(2 - eps))


@pytest.mark.parametrize("alpha,beta,p", [(-0.5, 0, 2), (0, 1, 1.5), (0.5, 0.5, 3)])
def test_kernel_iterated_bound_holds(alpha, beta, p):
    w = WeightSequence.power(alpha)
    C = qb_constant(w, beta, p, POL).bracket.hi * max(1 / (p + beta * p), 1)
    for frac in (0.1, 0.5, 0.9):
        kc = exponential_kernel_check(w, beta, p, frac / (2 * C), [1, 3, 30, 300, 3000], POL)
        assert np.all(kc.iterated_holds)


def test_kernel_check_range():
    with pytest.raises(OutOfRange):
        exponential_kernel_check(WeightSequence.power(0), 0, 2, 0.5, [1], POL)
    with pytest.raises(NotMember):
        exponential_kernel_check(WeightSequence.power(1), 0, 2, 0.01, [1], POL)


# ------------------------------------------------------- embedding weights

def test_embedding_constant_examples():
    assert embedding_weight_constant(0, 2, 1) == 2.0
    assert embedding_weight_constant(1, 2, 1) == 6.0
    with pytest.raises(OutOfRange):
        embedding_weight_constant(0, 2, 2.0)
    with pytest.raises(OutOfRange):
        embedding_weight_constant(0, 2, 0.0)


def test_verify_embedding_examples():
    assert verify_embedding_weight(0, 2, 1, 10)
    assert verify_embedding_weight(1, 2, 0.5, 100)
    assert verify_embedding_weight(0.5, 3, 2, 1)
    with pytest.raises(OutOfRange):
        verify_embedding_weight(0, 2, 5, 10)


@given(st.floats(0, 2), st.floats(2, 4), st.floats(0.05, 1), st.integers(1, 300))
def test_embedding_weight_property(beta, p0, frac, n):
    eps = frac * (p0 - 1)
    assert verify_embedding_weight(beta, p0, eps, n)


def test_embedding_failure_reports_index(monkeypatch):
    import hardyweights.extrapolation as ex
    # shrink the constant below the true tail ratio at m = 1 (which is 1 + ...)
    monkeypatch.setattr(ex, "embedding_weight_constant", lambda beta, p0, eps: 0.5)
    with pytest.raises(VerificationFailure) as info:
        ex.verify_embedding_weight(0, 2, 1, 10)
    assert info.value.index == 1


# --------------------------------------------------- extrapolation constants

def test_extrapolation_constant_examples():
    assert extrapolation_constant(2, 2, 0, 1, PhiFunction.identity()) == pytest.approx(2.0)
    assert extrapolation_constant(2, 4, 0, 1, PhiFunction.identity()) == pytest.approx(4.0)
    for beta in (0, 0.5, 1):
        val = extrapolation_constant(3, 4, beta, 2, PhiFunction.constant(1))
        assert val == pytest.approx(((1 + beta) * 3 - 3 + 1) ** (4 / 3))
    with pytest.raises(OutOfRange):
        extrapolation_constant(2, 1.5, 0, 0.5, PhiFunction.identity())
    with pytest.raises(OutOfRange):
        extrapolation_constant(2, 2, 0, 1.5, PhiFunction.identity())


def test_tilde_phi_grid_oracle():
    grid = [0.25, 0.5, 0.75, 1.0]
    tp = extrapolation_tilde_phi(2, 2, 0, PhiFunction.identity(), grid)
    oracle = min((2 - e) * max(2 - e, 1) * (2 - e) * (1 + 1 / e) for e in grid)
    assert tp.inf_c == pytest.approx(oracle) and tp.value == pytest.approx(oracle)
    assert extrapolation_tilde_phi(2, 2, 0, PhiFunction.constant(1), [1.0]).value == 1.0
    assert extrapolation_tilde_phi(2, 2, 0, PhiFunction.constant(1), grid, outer=3.0).value == 3.0
    with pytest.raises(EmptyGrid):
        extrapolation_tilde_phi(2, 2, 0, PhiFunction.identity(), [])
    with pytest.raises(OutOfRange):
        extrapolation_tilde_phi(2, 2, 0, PhiFunction.identity(), [1.5])


def test_tilde_phi_with_weight_uses_finite_outer_factor():
    tp = extrapolation_tilde_phi(2, 3, 0, PhiFunction.identity(), [0.5, 1.0],
                                 weight=WeightSequence.power(0), policy=POL)
    assert math.isfinite(tp.value) and tp.value >= tp.inf_c
    assert tp.value == pytest.approx(min(c * o for c, o in tp.per_eps.values()))


# ------------------------------------------------------------- end to end

def test_identical_pair_has_unit_ratio():
    f = extremal_truncated_power(1, 6)
    rep = run_extrapolation_check(f, f, PhiFunction.identity(), 2, 3, 1, policy=POL)
    assert rep.holds
    assert all(o.ratio == pytest.approx(1.0) for o in rep.outcomes)


@pytest.mark.parametrize("beta,p", [(0, 2), (1, 3), (0.5, 4)])
def test_scaled_pair(beta, p):
    f = extremal_truncated_power(beta, 5)
    g = QuasiSequence(beta, WeightSequence.explicit(2 * f.values_upto(5)))
    rep = run_extrapolation_check(f, g, PhiFunction.constant(1), 2, p, beta, policy=POL)
    assert rep.holds
    assert all(o.ratio == pytest.approx(2.0 ** -p) for o in rep.outcomes)


def test_hypothesis_violation_and_quasi_checks():
    f = extremal_truncated_power(0, 5)
    g = QuasiSequence(0, WeightSequence.explicit(0.1 * f.values_upto(5)))
    with pytest.raises(HypothesisViolated):
        run_extrapolation_check(f, g, PhiFunction.identity(), 2, 2, 0, policy=POL)
    bad = QuasiSequence(0, WeightSequence.explicit([1, 2]))
    with pytest.raises(NotQuasiMonotone):
        run_extrapolation_check(bad, bad, PhiFunction.identity(), 2, 2, 0, policy=POL)
    with pytest.raises(NotMember):
        run_extrapolation_check(f, f, PhiFunction.identity(), 2, 2, 0, policy=POL,
                                weights=[WeightSequence.power(1)])


def test_panel_padding_and_bounds():
    panel = HypothesisPanel(default_hypothesis_panel(0, 2, 8), 0, 2, PhiFunction.identity(), 8, POL)
    assert panel.holds(np.ones(3), np.ones(5))
    with pytest.raises(ValueError):
        panel.margins(np.ones(9), np.ones(9))


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.0, 1.0]), st.sampled_from([2.0, 3.0, 4.0]))
def test_random_pairs_satisfy_conclusion(seed, beta, p):
    rng = np.random.default_rng(seed)
    f, g = random_quasi_pair(rng, beta)
    try:
        rep = run_extrapolation_check(f, g, PhiFunction.identity(), 2, p, beta, policy=POL)
    except HypothesisViolated:
        return
    assert rep.holds
