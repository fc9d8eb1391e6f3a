"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the per-criterion lines are
also printed in the terminal summary.
"""

import math

import numpy as np
import pytest

from wsgreedy import (
    GreedyBudget,
    KMeansObjective,
    KMedianObjective,
    RegressionInstance,
    alpha_exact,
    bicriteria_solve,
    brute_force_min,
    css_objective,
    d2_adaptive_sample,
    estimate_alpha_empirical,
    estimate_curvature,
    greedy_extend,
    smlr_objective,
    sparse_regress,
    verify_supermodular,
    verify_weak_supermodularity,
)
from wsgreedy.core import iteration_budget
from wsgreedy.oracle import verify_transition_bound
from wsgreedy.regression import condition_number_sq, minimal_support, sparse_size_bound
from wsgreedy.runner import RunConfig, run

from conftest import naive_kmedian, naive_smlr

TOL = 1e-9
INCREMENTAL_TOL = 1e-8

RESULTS = {}


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[number] = line
    print(line)
    assert ok, line


class IncrementalCheck:
    """Observer comparing each candidate value with a from-scratch evaluation."""

    def __init__(self):
        self.max_dev = 0.0
        self.count = 0

    def observer(self, naive, n):
        def obs(t, S, values):
            prev = list(S)
            for j in range(n):
                if j in S:
                    continue
                ref = naive(prev + [j])
                self.max_dev = max(self.max_dev, abs(float(values[j]) - ref))
                self.count += 1

        return obs


CHECK = IncrementalCheck()


# ---------------------------------------------------------------- instances


def kmedian_case(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 13))
    W = rng.uniform(0.0, 1.0, size=(int(rng.integers(1, 13)), n))
    k = int(rng.integers(1, min(3, n) + 1))
    S0 = [int(rng.integers(n))]
    return KMedianObjective(W), k, S0, 1.0, rng.uniform(0.01, 0.5), (lambda S: naive_kmedian(W, S))


def smlr_case(seed):
    rng = np.random.default_rng(2000 + seed)
    m, n, ell = int(rng.integers(1, 9)), int(rng.integers(1, 9)), int(rng.integers(1, 3))
    inst = RegressionInstance(rng.normal(size=(m, n)), rng.normal(size=(m, ell)))
    k = int(rng.integers(1, min(3, n) + 1))
    X, Y = inst.design, inst.target
    return smlr_objective(inst), k, [], alpha_exact(inst).alpha, rng.uniform(0.01, 0.5), (lambda S: naive_smlr(X, Y, S))


@pytest.fixture(scope="module")
def additive_runs():
    """Criteria 1 and 2: greedy_extend on 200 k-median and 200 SMLR instances."""
    runs = []
    for make in (kmedian_case, smlr_case):
        for seed in range(200):
            f, k, S0, alpha, frac, naive = make(seed)
            f0 = f.evaluate(S0)
            E = frac * f0
            if E <= 0:
                E = 1e-12
            opt = brute_force_min(f, k).optimum_value
            S, trace = greedy_extend(f, S0, GreedyBudget(alpha, k, E), observer=CHECK.observer(naive, f.n))
            runs.append(dict(f=f, k=k, alpha=alpha, E=E, opt=opt, S=S, trace=trace))
    return runs


def test_criterion_1_additive_guarantee(additive_runs):
    bad = [r for r in additive_runs if r["trace"].final_value > r["opt"] + r["E"] + TOL]
    worst = max((r["trace"].final_value - r["opt"] - r["E"]) for r in additive_runs)
    report(1, not bad, f"{len(additive_runs) - len(bad)}/{len(additive_runs)} runs within f* + E; worst slack {worst:.3g}")


def test_criterion_2_contraction(additive_runs):
    steps = violations = 0
    for r in additive_runs:
        rate = 1.0 - 1.0 / (r["alpha"] * r["k"])
        vals = [r["trace"].initial_value] + r["trace"].values
        for prev, cur in zip(vals, vals[1:]):
            steps += 1
            if cur - r["opt"] > (prev - r["opt"]) * rate + TOL:
                violations += 1
    report(2, violations == 0, f"{steps - violations}/{steps} steps contract")


def test_criterion_3_supermodular_kmedian():
    failures = 0
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(3000 + seed)
        n = int(rng.integers(1, 9))
        f = KMedianObjective(rng.uniform(size=(int(rng.integers(1, 9)), n)))
        ok, _ = verify_supermodular(f)
        emp = estimate_alpha_empirical(f)
        worst = max(worst, emp)
        failures += (not ok) or emp > 1 + TOL
    report(3, failures == 0, f"{50 - failures}/50 supermodular with alpha <= 1; max empirical alpha {worst:.12g}")


def test_criterion_4_weak_supermodularity_smlr():
    failures = pairs = 0
    for seed in range(50):
        rng = np.random.default_rng(4000 + seed)
        ell = (1, 3)[seed % 2]
        X = rng.normal(size=(6, 6))
        X /= np.linalg.norm(X, axis=0)
        inst = RegressionInstance(X, rng.normal(size=(6, ell)))
        weak = verify_weak_supermodularity(smlr_objective(inst), alpha_exact(inst).alpha, tol=TOL)
        trans = verify_transition_bound(inst, tol=TOL)
        pairs += weak.enumerated_count + trans.enumerated_count
        failures += not (weak.verified and trans.verified)
    report(4, failures == 0, f"{50 - failures}/50 instances verified; {pairs} pairs enumerated")


def kmeans_case(seed):
    rng = np.random.default_rng(5000 + seed)
    k = int(rng.integers(1, 4))
    n = int(rng.integers(2 * k + 1, 13))
    pts = rng.normal(size=(n, int(rng.integers(1, 4))))
    return pts, k, 5000 + seed


@pytest.fixture(scope="module")
def bicriteria_runs():
    """Criterion 5: constrained k-means with a D^2 warm start and eps = 0.25."""
    eps = 0.25
    runs = []
    for seed in range(100):
        pts, k, run_seed = kmeans_case(seed)
        f = KMeansObjective(pts)
        init = d2_adaptive_sample(f, k, 2.0, np.random.default_rng(run_seed))
        opt = brute_force_min(f, k).optimum_value
        rho_hat = f.evaluate(init.solution) / opt
        rho = max(1.0, rho_hat)
        D2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
        naive = lambda S, D2=D2: naive_kmedian(D2, S)
        S, trace = bicriteria_solve(f, lambda *_: init.solution, rho, k, 1.0, eps, observer=CHECK.observer(naive, f.n))
        bound = len(init.solution) + (iteration_budget(1.0, k, rho, eps) if rho > eps else 0)
        runs.append(dict(pts=pts, k=k, seed=run_seed, rho=rho, opt=opt, S=S, value=trace.final_value, bound=bound))
    return runs


def test_criterion_5_bicriteria(bicriteria_runs):
    bad_ratio = [r for r in bicriteria_runs if r["value"] > 1.25 * r["opt"] * (1 + TOL)]
    bad_size = [r for r in bicriteria_runs if len(r["S"]) > r["bound"]]
    worst = max(r["value"] / r["opt"] for r in bicriteria_runs)
    report(
        5,
        not bad_ratio and not bad_size,
        f"{100 - len(bad_ratio)}/100 within 1.25 f*, {100 - len(bad_size)}/100 within size bound; worst ratio {worst:.4f}",
    )


def planted_case(seed):
    rng = np.random.default_rng(6000 + seed)
    n = int(rng.integers(2, 11))
    m = int(rng.integers(n, 13))
    X = rng.normal(size=(m, n))
    k_true = int(rng.integers(1, min(3, n) + 1))
    support = rng.choice(n, size=k_true, replace=False)
    beta = rng.uniform(1.0, 3.0, size=k_true) * rng.choice([-1, 1], size=k_true)
    y = X[:, support] @ beta
    y = y + 0.05 * rng.normal(size=m)
    inst = RegressionInstance(X, y)
    # E is set so the planted support sits at or below E/4
    E = 4.0 * max(smlr_objective(inst).evaluate(support), 1e-6 * float(y @ y)) * rng.uniform(1.0, 2.0)
    return inst, E


@pytest.fixture(scope="module")
def sparse_runs():
    """Criterion 6: planted sparse regression with oracle-confirmed k."""
    runs = []
    for seed in range(100):
        inst, E = planted_case(seed)
        f = smlr_objective(inst)
        k = minimal_support(f, E / 4.0)
        X, Y = inst.design, inst.target
        naive = lambda S, X=X, Y=Y: naive_smlr(X, Y, S)
        S, trace, rep = sparse_regress(inst, E, k=k, observer=CHECK.observer(naive, f.n))
        y2 = float(np.sum(Y**2))
        bound = sparse_size_bound(k, rep.alpha.alpha, y2, E)
        runs.append(dict(k=k, E=E, S=S, value=trace.final_value, bound=bound))
    return runs


def test_criterion_6_sparse_bound(sparse_runs):
    bad_value = [r for r in sparse_runs if r["value"] > r["E"]]
    bad_size = [r for r in sparse_runs if len(r["S"]) > r["bound"]]
    assert all(r["k"] is not None for r in sparse_runs)
    report(
        6,
        not bad_value and not bad_size,
        f"{100 - len(bad_value)}/100 reach E, {100 - len(bad_size)}/100 within size bound",
    )


def test_criterion_7_curvature():
    failures = 0
    slack = math.inf
    for seed in range(30):
        rng = np.random.default_rng(7000 + seed)
        f = css_objective(rng.normal(size=(5, 5)))
        c = estimate_curvature(f)
        kappa2 = condition_number_sq(f.instance.design)
        lhs = 1.0 / (1.0 - c)
        slack = min(slack, kappa2 - lhs)
        failures += not lhs <= kappa2 + TOL
    report(7, failures == 0, f"{30 - failures}/30 satisfy 1/(1-c) <= kappa^2; min slack {slack:.3g}")


def test_criterion_8_incremental(additive_runs, bicriteria_runs, sparse_runs):
    ok = CHECK.count > 0 and CHECK.max_dev <= INCREMENTAL_TOL
    report(8, ok, f"{CHECK.count} candidate values checked; max deviation {CHECK.max_dev:.3g}")


def test_criterion_9_determinism(bicriteria_runs):
    mismatched = disagree = 0
    for r in bicriteria_runs:
        cfg = dict(objective="kmeans", k=r["k"], epsilon=0.25, beta=2.0, seed=r["seed"], rho=r["rho"])
        first = run(RunConfig(**cfg), X=r["pts"])
        second = run(RunConfig(**cfg), X=r["pts"])
        mismatched += first.to_json(timings=False) != second.to_json(timings=False)
        disagree += sorted(first.result["set"]) != sorted(r["S"])
    report(9, mismatched == 0 and disagree == 0, f"{100 - mismatched}/100 byte-identical reruns; {disagree} differ from the direct solve")
