"""Sparse multiple linear regression and its special cases.

The objective is the squared Frobenius norm of the part of ``Y`` outside the
span of the selected columns of ``X``::

    f(S) = ||Y - X_S pinv(X_S) Y||_F^2

Sparse regression is the case of a single target column; column subset
selection uses ``Y = X``. Evaluation goes through an orthonormal basis of
``X_S`` grown one column at a time by Gram-Schmidt.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import GreedyTrace, SetObjective, Session, SolutionSet, greedy_extend_until
from .exceptions import ConfigError, GuardError, NoImprovingColumn, RankDeficientError, StallError

SPAN_THRESHOLD = 1e-10
ALPHA_EXACT_GUARD = 2**20


def _nonzero_singular_values(A: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0:
        return s
    cutoff = max(A.shape) * np.finfo(float).eps * s[0]
    return s[s > cutoff]


def pinv_norm_sq(A: np.ndarray) -> float:
    """``||pinv(A)||_2^2``: inverse square of the smallest nonzero singular value."""
    s = _nonzero_singular_values(A)
    if s.size == 0:
        return 0.0
    return float(1.0 / s[-1] ** 2)


class RegressionInstance:
    """Design matrix ``X`` (m x n) and targets ``Y`` (m x l).

    Columns of ``X`` are rescaled to unit norm; ``column_norms`` keeps the
    original norms so coefficients can be reported on the input scale.
    """

    def __init__(self, design, target, column_norm_tolerance: float = 1e-12):
        X = np.array(design, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        Y = np.array(target, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise ConfigError("design and target must be 1-D or 2-D arrays")
        if X.shape[0] != Y.shape[0]:
            raise ConfigError(f"design has {X.shape[0]} rows but target has {Y.shape[0]}")
        if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise ConfigError(f"empty design or target: {X.shape}, {Y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ConfigError("design and target must be finite")
        norms = np.linalg.norm(X, axis=0)
        zero = np.flatnonzero(norms <= column_norm_tolerance)
        if zero.size:
            raise ConfigError(f"design columns {zero.tolist()} have zero norm")
        X = X / norms
        self.design = X
        self.target = Y
        self.column_norms = norms
        self.column_norm_tolerance = column_norm_tolerance
        for a in (self.design, self.target, self.column_norms):
            a.setflags(write=False)

    @property
    def shape(self):
        m, n = self.design.shape
        return m, n, self.target.shape[1]

    def coefficients(self, S: Sequence[int]) -> np.ndarray:
        """Least-squares weights for the selected columns, on the original column scale."""
        S = list(S)
        if not S:
            return np.zeros((0, self.target.shape[1]))
        W, *_ = np.linalg.lstsq(self.design[:, S], self.target, rcond=None)
        return W / self.column_norms[S][:, None]


class ResidualState:
    """Orthonormal basis of the selected columns plus everything projected away from it.

    Attributes
    ----------
    basis : (m, r) array
        Orthonormal columns spanning ``X_S``.
    residual_columns : (m, n) array
        ``(I - X_S pinv(X_S)) x_i`` for every column.
    zeta : (n,) array
        Norms of the residual columns.
    projected_target : (m, l) array
        ``Y`` minus its projection onto the basis.
    """

    def __init__(self, instance: RegressionInstance, selected: Iterable[int] = (), threshold: float = SPAN_THRESHOLD):
        self.instance = instance
        self.threshold = threshold
        X = instance.design
        m, n = X.shape
        self.basis = np.zeros((m, 0))
        self.residual_columns = X.copy()
        self.zeta = np.linalg.norm(X, axis=0)
        self.projected_target = instance.target.copy()
        self.selected = SolutionSet((), n)
        for i in selected:
            self.add(i)

    @property
    def n(self) -> int:
        return self.instance.design.shape[1]

    @property
    def value(self) -> float:
        P = self.projected_target
        return float(np.sum(P * P))

    def spanned(self) -> np.ndarray:
        """Boolean mask of columns whose residual norm is below the threshold."""
        return self.zeta < self.threshold

    def gains(self) -> np.ndarray:
        """``||z_i^T Y||^2`` for each column; 0 for spanned or selected ones."""
        c = self.residual_columns.T @ self.projected_target
        num = np.sum(c * c, axis=1)
        out = np.zeros(self.n)
        live = ~self.spanned()
        live[list(self.selected)] = False
        out[live] = num[live] / self.zeta[live] ** 2
        return out

    def add(self, i: int) -> None:
        self.selected = self.selected.add(i)
        if self.zeta[i] < self.threshold:
            return
        q = self.residual_columns[:, i] / self.zeta[i]
        # one reorthogonalization pass
        q = q - self.basis @ (self.basis.T @ q)
        q /= np.linalg.norm(q)
        self.basis = np.column_stack([self.basis, q])
        R = self.residual_columns
        R -= np.outer(q, q @ R)
        R[:, i] = 0.0
        P = self.projected_target
        P -= np.outer(q, q @ P)
        self.zeta = np.linalg.norm(R, axis=0)


def incremental_gain_scan(state: ResidualState):
    """Best unselected, unspanned column and its gain (lowest index on ties)."""
    live = ~state.spanned()
    live[list(state.selected)] = False
    if not live.any():
        raise NoImprovingColumn("every remaining column lies in the span of the selection")
    g = state.gains()
    g[~live] = -np.inf
    i = int(np.flatnonzero(g >= g.max())[0])
    return i, float(g[i])


class SMLRObjective(SetObjective):
    """``f(S) = ||Y - X_S pinv(X_S) Y||_F^2`` over the columns of a :class:`RegressionInstance`."""

    def __init__(self, instance: RegressionInstance, threshold: float = SPAN_THRESHOLD, is_css: bool = False):
        self.instance = instance
        self.threshold = threshold
        self.is_css = is_css
        self.n = instance.design.shape[1]

    def state(self, S: Iterable[int] = ()) -> ResidualState:
        return ResidualState(self.instance, S, self.threshold)

    def evaluate(self, S: Iterable[int]) -> float:
        return self.state(S).value

    def gain(self, S: Iterable[int], i: int) -> float:
        return float(self.state(S).gains()[i])

    def session(self, S0=()) -> "SMLRSession":
        return SMLRSession(self, S0)


class SMLRSession(Session):
    def __init__(self, objective: SMLRObjective, S0=()):
        self.objective = objective
        self.state = objective.state(SolutionSet.coerce(S0, objective.n))

    @property
    def selected(self) -> SolutionSet:
        return self.state.selected

    @property
    def value(self) -> float:
        return self.state.value

    def candidate_values(self) -> np.ndarray:
        vals = np.maximum(self.value - self.state.gains(), 0.0)
        vals[list(self.selected)] = np.inf
        return vals

    def add(self, i: int) -> float:
        self.state.add(i)
        return self.value


def smlr_objective(instance: RegressionInstance) -> SMLRObjective:
    return SMLRObjective(instance)


def css_objective(X) -> SMLRObjective:
    """Column subset selection on the column-normalized ``X`` (targets are the normalized columns)."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    Xn = X / np.where(norms > 0, norms, 1.0)  # zero columns are rejected by the instance
    return SMLRObjective(RegressionInstance(Xn, Xn), is_css=True)


# ---------------------------------------------------------------------------
# alpha certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaCertificate:
    alpha: float
    scope: str
    detail: str = ""

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ConfigError(f"alpha certificate must be >= 1, got {self.alpha}")


def alpha_exact(instance: RegressionInstance, max_subset_size: Optional[int] = None, guard: int = ALPHA_EXACT_GUARD) -> AlphaCertificate:
    """Maximum of ``||pinv(X_S')||_2^2`` over all non-empty ``S'`` up to ``max_subset_size``."""
    X = instance.design
    n = X.shape[1]
    size = n if max_subset_size is None else min(max_subset_size, n)
    if size < 1:
        raise ConfigError("max_subset_size must be >= 1")
    count = sum(comb(n, j) for j in range(1, size + 1))
    if count > guard:
        raise GuardError(f"alpha_exact would enumerate {count} subsets (guard {guard})")
    best, arg = 1.0, (0,)
    for j in range(1, size + 1):
        for S in itertools.combinations(range(n), j):
            a = pinv_norm_sq(X[:, S])
            if a > best:
                best, arg = a, S
    return AlphaCertificate(max(best, 1.0), "exact", f"max over {count} subsets of size <= {size}; attained at {list(arg)}")


def alpha_spectral_bound(instance: RegressionInstance) -> AlphaCertificate:
    """``||pinv(X)||_2^2`` for a full-column-rank design."""
    X = instance.design
    m, n = X.shape
    if n > m:
        raise RankDeficientError(f"design is {m}x{n}; a wide matrix cannot have full column rank")
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] <= max(m, n) * np.finfo(float).eps * s[0]:
        raise RankDeficientError("design is rank deficient; use alpha_exact or sampled subsets")
    return AlphaCertificate(max(1.0, float(1.0 / s[-1] ** 2)), "spectral-bound", "1/sigma_min(X)^2 (full column rank)")


def alpha_sampled(instance: RegressionInstance, subsets: Iterable[Sequence[int]]) -> AlphaCertificate:
    """Maximum of ``||pinv(X_S')||_2^2`` over the given subsets only. Not a certified bound."""
    X = instance.design
    best, count = 1.0, 0
    for S in subsets:
        S = list(S)
        if S:
            best = max(best, pinv_norm_sq(X[:, S]))
            count += 1
    return AlphaCertificate(best, "subset-sampled", f"max over {count} sampled subsets; heuristic")


def condition_number_sq(X) -> float:
    s = np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)
    return float((s[0] / s[-1]) ** 2)


# ---------------------------------------------------------------------------
# sparse regression
# ---------------------------------------------------------------------------


@dataclass
class SparseReport:
    size: int
    value: float
    target_error: float
    k: Optional[int]
    alpha: Optional[AlphaCertificate]
    bound: Optional[int]
    natarajan_bound: Optional[int]
    within_bound: Optional[bool]
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "value": self.value,
            "target_error": self.target_error,
            "k": self.k,
            "alpha": None if self.alpha is None else {"value": self.alpha.alpha, "scope": self.alpha.scope},
            "bound": self.bound,
            "natarajan_bound": self.natarajan_bound,
            "within_bound": self.within_bound,
        }


def sparse_size_bound(k: int, alpha: float, y_norm_sq: float, target_error: float) -> int:
    """``ceil(k * alpha * (ln(||y||^2 / E) + ln(4/3)))``, floored at 0."""
    if y_norm_sq <= target_error:
        return 0
    return max(0, math.ceil(k * alpha * (math.log(y_norm_sq / target_error) + math.log(4.0 / 3.0))))


def natarajan_size_bound(k: int, alpha: float, y_norm_sq: float, target_error: float) -> int:
    """Older comparison bound ``ceil(9 * k * alpha * ln(||y||^2 / E))``."""
    if y_norm_sq <= target_error:
        return 0
    return math.ceil(9 * k * alpha * math.log(y_norm_sq / target_error))


def minimal_support(f: SetObjective, threshold: float, max_k: Optional[int] = None, guard: int = 2**22) -> Optional[int]:
    """Smallest ``k`` such that some ``|S| = k`` has ``f(S) <= threshold`` (brute force)."""
    n = f.n
    max_k = n if max_k is None else max_k
    total = 0
    for k in range(0, max_k + 1):
        total += comb(n, k)
        if total > guard:
            raise GuardError(f"minimal_support enumeration exceeds guard {guard}")
        if any(f.evaluate(S) <= threshold for S in itertools.combinations(range(n), k)):
            return k
    return None


def sparse_regress(
    instance: RegressionInstance,
    target_error: float,
    k: Optional[int] = None,
    alpha: Optional[AlphaCertificate] = None,
    *,
    observer=None,
):
    """Greedy sparse regression from the empty support until ``f(S) <= E``.

    ``k`` is the smallest support size reaching ``E / 4``; when omitted it is
    found by brute force. ``alpha`` defaults to the spectral bound for
    full-column-rank designs and to :func:`alpha_exact` otherwise.

    Returns ``(solution, trace, report)``. Raises :class:`StallError` if no
    column improves the fit before ``E`` is reached.
    """
    if instance.target.shape[1] != 1:
        raise ConfigError("sparse regression needs a single target column")
    if not target_error > 0:
        raise ConfigError(f"target error must be positive, got {target_error}")
    f = SMLRObjective(instance)
    S, trace = greedy_extend_until(f, (), target_error, max_steps=f.n, observer=observer)
    y2 = float(np.sum(instance.target**2))
    if alpha is None:
        try:
            alpha = alpha_spectral_bound(instance)
        except RankDeficientError:
            alpha = alpha_exact(instance)
    if k is None:
        k = minimal_support(f, target_error / 4.0)
    bound = nat = within = None
    if k is not None:
        bound = sparse_size_bound(k, alpha.alpha, y2, target_error)
        nat = natarajan_size_bound(k, alpha.alpha, y2, target_error)
        within = len(S) <= bound
    report = SparseReport(len(S), trace.final_value, target_error, k, alpha, bound, nat, within)
    if trace.final_value > target_error and trace.stop_reason in ("stalled", "exhausted"):
        raise StallError(
            f"greedy stalled at f={trace.final_value:.6g} > E={target_error:.6g} after {len(S)} columns",
            partial=(S, trace, report),
        )
    return S, trace, report
