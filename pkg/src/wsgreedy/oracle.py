"""Brute-force ground truth for small instances.

Everything here enumerates subsets exhaustively and refuses, with
:class:`~wsgreedy.exceptions.GuardError`, to run past fixed size limits.
Subsets are encoded as bit masks (bit ``i`` set means element ``i`` is in).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Tuple

import numpy as np

from .core import SetObjective, SolutionSet
from .exceptions import GuardError
from .regression import RegressionInstance, pinv_norm_sq

BRUTE_FORCE_GUARD = 2**22
PAIR_MAX_N = 10
CURVATURE_MAX_N = 8
SUBSET_TABLE_MAX_N = 16
PAIR_TOL = 1e-9
#: Gains at or below this are treated as zero when forming ratios.
ZERO_GAIN = 1e-12


@dataclass
class OracleReport:
    optimum_value: Optional[float] = None
    optimum_set: Optional[SolutionSet] = None
    enumerated_count: int = 0
    verified: bool = True
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None

    def __post_init__(self):
        if not self.verified and self.witness is None:
            raise ValueError("a failed verification must carry a witness")

    def to_dict(self) -> dict:
        return {
            "optimum_value": self.optimum_value,
            "optimum_set": None if self.optimum_set is None else list(self.optimum_set),
            "enumerated_count": self.enumerated_count,
            "verified": self.verified,
            "witness": None if self.witness is None else [list(self.witness[0]), list(self.witness[1])],
        }


def mask_to_tuple(mask: int) -> Tuple[int, ...]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        out += (masks >> i) & 1
    return out


def subset_values(f: SetObjective, n: Optional[int] = None, max_n: int = SUBSET_TABLE_MAX_N) -> np.ndarray:
    """``F[mask] = f(mask_to_tuple(mask))`` for every subset of ``range(n)``."""
    n = f.n if n is None else n
    if n > max_n:
        raise GuardError(f"subset table for n={n} exceeds limit n <= {max_n}")
    return np.array([f.evaluate(mask_to_tuple(s)) for s in range(1 << n)], dtype=float)


def brute_force_min(f: SetObjective, k: int, n: Optional[int] = None, guard: int = BRUTE_FORCE_GUARD, tol: float = 1e-12) -> OracleReport:
    """Exact ``min {f(S) : |S| <= k}``.

    The empty set takes part only when ``f({})`` is finite. Among optima within
    ``tol`` of each other the lexicographically smallest sorted tuple wins.
    """
    n = f.n if n is None else n
    k = min(k, n)
    count = sum(comb(n, j) for j in range(k + 1))
    if count > guard:
        raise GuardError(f"brute_force_min would enumerate {count} subsets (guard {guard})")
    best_val, best_set, seen = math.inf, None, 0
    for j in range(k + 1):
        for S in itertools.combinations(range(n), j):
            v = f.evaluate(S)
            seen += 1
            if not math.isfinite(v):
                continue
            if best_set is None or v < best_val - tol or (v <= best_val + tol and S < best_set):
                best_val, best_set = v, S
    return OracleReport(best_val, SolutionSet(best_set or (), n), seen, True, None)


def _pair_tables(f: SetObjective, n: int):
    """Yield, for each subset ``S`` with finite value, the per-``T`` arrays.

    Yields ``(s, diff, count, maxgain, live)`` where, indexed by the mask of ``T``,
    ``diff = f(S) - f(S | T)``, ``count = |T \\ S|`` and ``maxgain`` is the
    largest single-element gain over ``T \\ S`` (0 if empty).
    """
    if n > PAIR_MAX_N:
        raise GuardError(f"pairwise enumeration refused for n={n} > {PAIR_MAX_N}")
    F = subset_values(f, n)
    N = 1 << n
    masks = np.arange(N)
    pc = popcounts(n)
    for s in range(N):
        if not math.isfinite(F[s]):
            continue
        gains = np.array([F[s] - F[s | (1 << i)] for i in range(n)])
        maxgain = np.full(N, -np.inf)
        for i in range(n):
            if not s >> i & 1:
                has = ((masks >> i) & 1).astype(bool)
                maxgain[has] = np.maximum(maxgain[has], gains[i])
        new = masks & ~s
        live = new != 0
        maxgain[~live] = 0.0
        yield s, F[s] - F[s | masks], pc[new], maxgain, live


def verify_weak_supermodularity(f: SetObjective, alpha: float, n: Optional[int] = None, tol: float = PAIR_TOL) -> OracleReport:
    """Exhaustively check ``f(S) - f(S|T) <= alpha * |T\\S| * max_i [f(S) - f(S+i)]``.

    Every ordered pair ``(S, T)`` with ``T \\ S`` non-empty is tested; subsets
    with an infinite value (the clustering sentinel) are skipped.
    """
    n = f.n if n is None else n
    checked = 0
    for s, diff, cnt, mg, live in _pair_tables(f, n):
        rhs = alpha * cnt * mg
        viol = live & (diff > rhs + tol)
        checked += int(live.sum())
        if viol.any():
            t = int(np.flatnonzero(viol)[0])
            return OracleReport(enumerated_count=checked, verified=False, witness=(mask_to_tuple(s), mask_to_tuple(t)))
    return OracleReport(enumerated_count=checked, verified=True)


def estimate_alpha_empirical(f: SetObjective, n: Optional[int] = None, tol: float = PAIR_TOL) -> float:
    """Smallest ``alpha`` for which the weak-supermodularity inequality holds on every pair.

    Pairs whose best single gain is zero are skipped unless the set gain
    exceeds ``tol``, in which case no finite alpha works and ``inf`` is
    returned. Never returns less than 1.
    """
    n = f.n if n is None else n
    best = 1.0
    for _, diff, cnt, mg, live in _pair_tables(f, n):
        pos = live & (mg > ZERO_GAIN)
        if pos.any():
            best = max(best, float(np.max(diff[pos] / (cnt[pos] * mg[pos]))))
        if np.any(live & ~pos & (diff > tol)):
            return math.inf
    return best


def estimate_curvature(f: SetObjective, n: Optional[int] = None, max_n: int = CURVATURE_MAX_N) -> float:
    """Curvature ``c = 1 - min_j min_{S,T not containing j} m_j(S) / m_j(T)``.

    ``m_j(S) = f(S) - f(S + j)``. Ratios with a zero denominator are skipped,
    as are subsets with infinite value. Returns ``nan`` when every
    denominator is zero.
    """
    n = f.n if n is None else n
    if n > max_n:
        raise GuardError(f"curvature enumeration refused for n={n} > {max_n}")
    F = subset_values(f, n)
    masks = np.arange(1 << n)
    worst = math.inf
    for j in range(n):
        without = masks[((masks >> j) & 1) == 0]
        base = F[without]
        marg = base - F[without | (1 << j)]
        ok = np.isfinite(base)
        marg = marg[ok]
        denom = marg[marg > ZERO_GAIN]
        if denom.size == 0:
            continue
        worst = min(worst, float(np.min(marg) / np.max(denom)))
    if worst == math.inf:
        return math.nan
    return 1.0 - worst


def verify_transition_bound(instance: RegressionInstance, tol: float = PAIR_TOL, threshold: float = 1e-10) -> OracleReport:
    """Check ``||pinv(Z_{T\\S})||_2 <= ||pinv(X_{T|S})||_2`` on every disjoint pair.

    ``Z_{T\\S}`` holds the columns of ``T \\ S`` projected away from the span
    of ``X_S`` and normalized. Pairs with a column spanned by ``X_S`` are
    skipped since its normalized residual is undefined.
    """
    X = instance.design
    n = X.shape[1]
    if n > PAIR_MAX_N:
        raise GuardError(f"transition check refused for n={n} > {PAIR_MAX_N}")
    N = 1 << n
    xnorm = np.array([pinv_norm_sq(X[:, list(mask_to_tuple(u))]) if u else 0.0 for u in range(N)])
    checked = 0
    for s in range(N):
        S = list(mask_to_tuple(s))
        if S:
            U, sv, _ = np.linalg.svd(X[:, S], full_matrices=False)
            Q = U[:, sv > max(X.shape) * np.finfo(float).eps * sv[0]]
            R = X - Q @ (Q.T @ X)
        else:
            R = X.copy()
        zeta = np.linalg.norm(R, axis=0)
        rest = ~s & (N - 1)
        d = rest
        while d:
            D = list(mask_to_tuple(d))
            if np.all(zeta[D] >= threshold):
                Z = R[:, D] / zeta[D]
                checked += 1
                if pinv_norm_sq(Z) > xnorm[s | d] * (1 + tol) + tol:
                    return OracleReport(enumerated_count=checked, verified=False, witness=(tuple(S), tuple(D)))
            d = (d - 1) & rest
    return OracleReport(enumerated_count=checked, verified=True)


def brute_force_min_bitmask(f: SetObjective, k: int, n: Optional[int] = None) -> OracleReport:
    """Same optimum as :func:`brute_force_min`, enumerated in bit-mask order."""
    n = f.n if n is None else n
    if n > SUBSET_TABLE_MAX_N:
        raise GuardError(f"bit-mask enumeration refused for n={n}")
    best_val, best_set, seen = math.inf, None, 0
    for s in range(1 << n):
        if bin(s).count("1") > k:
            continue
        S = mask_to_tuple(s)
        v = f.evaluate(S)
        seen += 1
        if not math.isfinite(v):
            continue
        if best_set is None or v < best_val - 1e-12 or (v <= best_val + 1e-12 and S < best_set):
            best_val, best_set = v, S
    return OracleReport(best_val, SolutionSet(best_set or (), n), seen, True, None)


def unconstrained_kmeans_optimum(points, k: int, guard: int = 2**20) -> float:
    """Exact unconstrained k-means cost by enumerating all assignments to ``k`` labels."""
    x = np.asarray(points, dtype=float)
    m = x.shape[0]
    if k >= m:
        return 0.0
    if k**m > guard:
        raise GuardError(f"partition enumeration of {k}**{m} exceeds guard {guard}")
    best = math.inf
    # fix the first point's label to cut symmetric duplicates
    for labels in itertools.product(range(k), repeat=m - 1):
        lab = np.array((0,) + labels)
        cost = 0.0
        for c in range(k):
            pts = x[lab == c]
            if len(pts):
                cost += float(np.sum((pts - pts.mean(axis=0)) ** 2))
        best = min(best, cost)
    return best
