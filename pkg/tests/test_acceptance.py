"""Acceptance suite: one test per criterion, each timed against its budget.

A PASS/FAIL line per criterion is printed at the end of the session
(see conftest.py) and also inline when run with ``-s``.
"""
import contextlib
import io
import json
import math
import time

import numpy as np
import pytest

from hardyweights.classes import (Verdict, b_constant, diverges_across_decades,
                                  generalized_psi_condition, qb_constant)
from hardyweights.cli import execute, parse_args
from hardyweights.errors import HypothesisViolated
from hardyweights.extrapolation import (HypothesisPanel, PhiFunction, default_conclusion_panel,
                                        default_hypothesis_panel, epsilon_bound,
                                        openended_epsilon, random_quasi_pair,
                                        run_extrapolation_check, verify_embedding_weight)
from hardyweights.lemmas import run_oracle_suite
from hardyweights.operators import PsiWeight
from hardyweights.sequences import (QuasiSequence, TruncationPolicy, WeightSequence,
                                    is_quasi_nonincreasing)
from hardyweights.verifier import extremizer_ratios, hardy_sandwich

pytestmark = pytest.mark.acceptance

RESULTS = {}


@contextlib.contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    ok, detail = False, ""
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
        ok = True
    except BaseException as exc:
        detail = f" -- {type(exc).__name__}: {exc}".splitlines()[0][:160]
        raise
    finally:
        elapsed = time.perf_counter() - t0
        line = (f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} "
                f"({elapsed:.2f}s, budget {budget}s){detail}")
        RESULTS[number] = line
        print(line)


def cli(argv):
    buf = io.StringIO()
    code = execute(parse_args(argv.split()), buf)
    return code, json.loads(buf.getvalue())


# ---------------------------------------------------------------------------

def test_criterion_1_power_membership_boundary():
    with criterion(1, "power-weight membership boundary", 10):
        for alpha in (-0.5, 0, 0.5, 0.9, 1.0, 1.1, 2):
            code, rep = cli(f"check-weight --weight power:alpha={alpha} --beta 0 --p 2 "
                            "--n-max 100000")
            expected = "Member" if alpha < 1 else "NonMemberEvidence"
            assert rep["verdict"] == expected, (alpha, rep["verdict"])
            assert code == (0 if alpha < 1 else 1)


def test_criterion_2_constant_bracket():
    with criterion(2, "B_2 bracket of the constant weight", 5):
        est = b_constant(WeightSequence.power(0), 2, TruncationPolicy(N=10 ** 6))
        assert est.verdict is Verdict.MEMBER
        assert est.bracket.contains(1 + math.pi ** 2 / 6)
        assert est.bracket.rel_width() <= 1e-3
        assert est.witness_n == 1


def test_criterion_3_sandwich():
    with criterion(3, "lower bound <= absorbed upper bound", 60):
        pol = TruncationPolicy(N=10 ** 4)
        checked = violations = 0
        for a in (0.0, 1.0, 0.5):
            psi = PsiWeight.power(a)
            for beta in (0.0, 0.5, 1.0):
                for p in (0.5, 1.0, 2.0, 3.0):
                    for alpha in (-0.5, 0.0):
                        v = WeightSequence.power(alpha)
                        rep = hardy_sandwich(psi, v, beta, p, pol)
                        if not rep.condition.is_member:
                            continue
                        checked += 1
                        violations += not rep.holds
        assert checked >= 20, checked
        assert violations == 0


def test_criterion_4_necessity():
    with criterion(4, "growing extremizer ratios imply NonMemberEvidence", 60):
        N = 10 ** 4
        pol = TruncationPolicy(N=N)
        flagged = contradictions = 0
        for a in (0.0, 1.0, 0.5):
            psi = PsiWeight.power(a)
            for beta in (0.0, 0.5, 1.0):
                for p in (0.5, 1.0, 2.0, 3.0):
                    weights = [WeightSequence.power(x) for x in (-0.5, 0.0, 0.5, 1.0, 2.0)]
                    # boundary weights whose ratios grow only logarithmically
                    weights.append(WeightSequence.powerlog((a + 1) * p - 1, -2))
                    for v in weights:
                        r = extremizer_ratios(psi, v, beta, p, N, pol)
                        if not diverges_across_decades([r[99], r[999], r[9999]]):
                            continue
                        flagged += 1
                        cond = generalized_psi_condition(v, psi, beta, p, pol)
                        contradictions += cond.verdict is not Verdict.NON_MEMBER
        assert flagged > 0
        assert contradictions == 0


def test_criterion_5_lemma_oracles():
    with criterion(5, "lemma oracle suite", 30):
        summary = run_oracle_suite(seed=20240601, cases=1000, log_k_max=500, log_m_max=4)
        assert summary.passed, summary.failures[:3]
        counts = summary.to_dict()["counts"]
        for name in ("power_rule_one", "power_rule_two", "fubini", "partial_sums", "mean_value"):
            assert counts[name]["total"] >= 990, (name, counts[name])
        assert counts["log_sum"]["total"] == 5 * sum(500 - n for n in range(1, 500))


OPEN_ENDED_CASES = [(-0.5, 0, 1.5), (0.0, 0, 1.5), (0.4, 1, 1.5), (0.0, 0, 2), (0.9, 0, 2),
                    (0.5, 1, 2), (-0.5, 1, 2), (1.5, 0, 3), (1.9, 1, 3), (0.0, 1, 3)]


def test_criterion_6_open_ended():
    with criterion(6, "open-ended epsilon at the formula value", 60):
        pol = TruncationPolicy(N=10 ** 5)
        assert len(OPEN_ENDED_CASES) == 10
        for alpha, beta, p in OPEN_ENDED_CASES:
            w = WeightSequence.power(alpha)
            res = openended_epsilon(w, beta, p, pol)
            assert res.eps_formula == pytest.approx(epsilon_bound(res.c_used, beta, p))
            assert res.eps_verified == res.eps_formula, (alpha, beta, p)
            assert qb_constant(w, beta, p - res.eps_formula, pol).is_member


def test_criterion_7_embedding_weights():
    with criterion(7, "embedding weights", 30):
        failures = []
        for beta in (0.0, 0.5, 1.0):
            for p0 in (2.0, 3.0):
                for eps in sorted({0.5, 1.0, p0 - 1.0}):
                    for n in (1, 10, 100):
                        if not verify_embedding_weight(beta, p0, eps, n):
                            failures.append((beta, p0, eps, n))
        assert not failures


def test_criterion_8_extrapolation_end_to_end():
    with criterion(8, "extrapolation end to end", 120):
        pol = TruncationPolicy(N=10 ** 4)
        phi = PhiFunction.identity()
        rng = np.random.default_rng(8)
        for beta in (0.0, 1.0):
            hyp = default_hypothesis_panel(beta, 2.0, 32)
            panel = HypothesisPanel(hyp, beta, 2.0, phi, 32, pol)
            for p in (2.0, 3.0, 4.0):
                concl = default_conclusion_panel(beta, p)
                assert not set(concl) & set(hyp)
                for w in concl:
                    assert qb_constant(w, beta, p, pol).is_member
                accepted = failures = rejected = 0
                while accepted < 100:
                    f, g = random_quasi_pair(rng, beta, 32)
                    try:
                        rep = run_extrapolation_check(f, g, phi, 2.0, p, beta, concl, pol,
                                                      panel=panel)
                    except HypothesisViolated:
                        rejected += 1
                        assert rejected < 10 ** 4
                        continue
                    accepted += 1
                    failures += not rep.holds
                assert failures == 0, (beta, p, failures)


def test_criterion_9_beta_zero_reduction():
    with criterion(9, "beta = 0 reduces to the non-increasing case", 60):
        pol = TruncationPolicy(N=10 ** 4)
        phi = PhiFunction.identity()
        rng = np.random.default_rng(9)
        for p in (2.0, 3.0, 4.0):
            for w in default_conclusion_panel(0.0, p) + [WeightSequence.power(1.5)]:
                q, b = qb_constant(w, 0.0, p, pol), b_constant(w, p, pol)
                assert q.verdict == b.verdict
                assert q.bracket.lo == b.bracket.lo and q.bracket.hi == b.bracket.hi
            done = 0
            while done < 30:
                f, g = random_quasi_pair(rng, 0.0, 24)
                fv, gv = f.values_upto(24), g.values_upto(24)
                # Q_0 is exactly the cone of non-increasing sequences
                assert is_quasi_nonincreasing(fv, 0.0, 24)[0]
                assert np.all(np.diff(fv) <= 0) and np.all(np.diff(gv) <= 0)
                try:
                    rep = run_extrapolation_check(f, g, phi, 2.0, p, 0.0, policy=pol)
                except HypothesisViolated:
                    continue
                for w, out in zip(default_conclusion_panel(0.0, p), rep.outcomes):
                    wv = w.values_upto(24)
                    direct = math.fsum(fv ** p * wv) / math.fsum(gv ** p * wv)
                    assert out.ratio == pytest.approx(direct, rel=1e-13)
                    assert out.holds
                done += 1
            # a non-monotone sequence is not in Q_0
            bad = QuasiSequence(0.0, WeightSequence.explicit([1.0, 2.0]))
            assert not is_quasi_nonincreasing(bad, 0.0, 2)[0]
