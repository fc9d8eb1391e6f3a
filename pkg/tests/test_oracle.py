import itertools
import math

import numpy as np
import pytest

from wsgreedy import (
    GuardError,
    KMedianObjective,
    RegressionInstance,
    SetFunction,
    alpha_exact,
    brute_force_min,
    css_objective,
    estimate_alpha_empirical,
    estimate_curvature,
    smlr_objective,
    verify_weak_supermodularity,
)
from wsgreedy.oracle import OracleReport, brute_force_min_bitmask, mask_to_tuple, subset_values
from wsgreedy.regression import condition_number_sq

from conftest import enumerate_min, naive_kmedian

W2 = [[0, 5], [3, 1]]


class TestBruteForce:
    def test_two_by_two(self):
        f = KMedianObjective(W2)
        r1 = brute_force_min(f, 1)
        assert list(r1.optimum_set) == [0] and r1.optimum_value == 3
        r2 = brute_force_min(f, 2)
        assert set(r2.optimum_set) == {0, 1} and r2.optimum_value == 1

    def test_orthonormal_css_ties(self, rng):
        Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        rep = brute_force_min(css_objective(Q), 2)
        assert rep.optimum_value == pytest.approx(3.0)
        assert tuple(rep.optimum_set) == (0, 1)

    def test_empty_set_only_when_finite(self):
        f = SetFunction(3, lambda S: 1.0)
        assert len(brute_force_min(f, 2).optimum_set) == 0
        g = KMedianObjective(W2)
        assert len(brute_force_min(g, 2).optimum_set) > 0

    def test_two_enumeration_orders_agree(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 9))
            W = rng.uniform(size=(5, n))
            f = KMedianObjective(W)
            k = int(rng.integers(1, 4))
            a = brute_force_min(f, k)
            b = brute_force_min_bitmask(f, k)
            c = enumerate_min(lambda S: naive_kmedian(W, S), n, k)
            assert a.optimum_value == b.optimum_value == pytest.approx(c[0])
            assert a.optimum_set == b.optimum_set

    def test_guard(self):
        f = SetFunction(40, lambda S: 1.0)
        with pytest.raises(GuardError):
            brute_force_min(f, 10)

    def test_report_requires_witness(self):
        with pytest.raises(ValueError):
            OracleReport(verified=False)


def test_mask_helpers():
    assert mask_to_tuple(0b1011) == (0, 1, 3)
    f = SetFunction(3, lambda S: float(sum(S)))
    assert list(subset_values(f)) == [0, 0, 1, 1, 2, 2, 3, 3]


class TestWeakSupermodularity:
    def test_kmedian_alpha_one(self, rng):
        f = KMedianObjective(rng.uniform(size=(5, 6)))
        assert verify_weak_supermodularity(f, 1.0).verified

    def test_smlr_exact_alpha(self, rng):
        inst = RegressionInstance(rng.normal(size=(5, 5)), rng.normal(size=(5, 2)))
        assert verify_weak_supermodularity(smlr_objective(inst), alpha_exact(inst).alpha).verified

    def test_half_alpha_fails_somewhere(self):
        # 2x2 designs are where alpha_exact can be close to tight
        found = False
        for seed in range(50):
            rng = np.random.default_rng(seed)
            inst = RegressionInstance(rng.normal(size=(2, 2)), rng.normal(size=2))
            a = alpha_exact(inst).alpha
            emp = estimate_alpha_empirical(smlr_objective(inst))
            if 0.5 * a >= 1 and emp > 0.5 * a:
                rep = verify_weak_supermodularity(smlr_objective(inst), 0.5 * a)
                assert not rep.verified
                S, T = rep.witness
                f = smlr_objective(inst)
                U = sorted(set(S) | set(T))
                new = set(T) - set(S)
                best = max(f.evaluate(S) - f.evaluate(list(S) + [i]) for i in new)
                assert f.evaluate(S) - f.evaluate(U) > 0.5 * a * len(new) * best
                found = True
                break
        assert found

    def test_guard(self):
        with pytest.raises(GuardError):
            verify_weak_supermodularity(SetFunction(11, lambda S: 1.0), 1.0)

    def test_tight_two_column_construction(self):
        # y along x0 - x1: pair gain over best single gain is exactly 1 / (1 - cos th)
        th = 0.4
        X = np.array([[1.0, math.cos(th)], [0.0, math.sin(th)]])
        inst = RegressionInstance(X, X[:, 0] - X[:, 1])
        a = alpha_exact(inst).alpha
        assert a == pytest.approx(1.0 / (1.0 - math.cos(th)))
        assert estimate_alpha_empirical(smlr_objective(inst)) == pytest.approx(a, rel=1e-9)
        assert not verify_weak_supermodularity(smlr_objective(inst), 0.9 * a).verified


class TestAlphaEmpirical:
    def test_kmedian(self, rng):
        f = KMedianObjective(rng.uniform(size=(6, 7)))
        assert estimate_alpha_empirical(f) <= 1 + 1e-9

    def test_orthonormal_smlr(self, rng):
        Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        f = smlr_objective(RegressionInstance(Q, rng.normal(size=5)))
        assert estimate_alpha_empirical(f) == pytest.approx(1.0, abs=1e-9)

    def test_near_collinear_between_one_and_exact(self):
        th = 0.2
        X = np.array([[1.0, math.cos(th)], [0.0, math.sin(th)]])
        inst = RegressionInstance(X, [0.3, 1.0])
        emp = estimate_alpha_empirical(smlr_objective(inst))
        assert 1.0 <= emp <= alpha_exact(inst).alpha + 1e-9

    def test_no_gain_returns_one(self):
        assert estimate_alpha_empirical(SetFunction(3, lambda S: 2.0)) == 1.0


class TestCurvature:
    def test_modular(self, rng):
        c = rng.uniform(0.1, 1.0, size=5)
        f = SetFunction(5, lambda S: 10.0 - sum(c[i] for i in S))
        assert estimate_curvature(f) == pytest.approx(0.0, abs=1e-12)

    def test_orthonormal_css(self, rng):
        Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        f = css_objective(Q)
        c = estimate_curvature(f)
        assert c == pytest.approx(0.0, abs=1e-9)
        assert condition_number_sq(Q) == pytest.approx(1.0)

    def test_curvature_gap_within_condition_number(self, rng):
        for _ in range(5):
            X = rng.normal(size=(5, 5))
            f = css_objective(X)
            c = estimate_curvature(f)
            assert 1.0 / (1.0 - c) <= condition_number_sq(f.instance.design) + 1e-9

    def test_curvature_by_direct_definition(self, rng):
        X = rng.normal(size=(4, 4))
        f = css_objective(X)
        ratios = []
        for j in range(4):
            others = [i for i in range(4) if i != j]
            subsets = [S for r in range(4) for S in itertools.combinations(others, r)]
            for S in subsets:
                for T in subsets:
                    den = f.evaluate(T) - f.evaluate(T + (j,))
                    if den > 1e-12:
                        ratios.append((f.evaluate(S) - f.evaluate(S + (j,))) / den)
        assert estimate_curvature(f) == pytest.approx(1 - min(ratios), abs=1e-9)

    def test_undefined(self):
        assert math.isnan(estimate_curvature(SetFunction(3, lambda S: 1.0)))

    def test_guard(self):
        with pytest.raises(GuardError):
            estimate_curvature(SetFunction(9, lambda S: 1.0))
